import { z } from "zod";

export const FIGURE_KINDS = ["cumulants-vs-ns", "sigma-vs-nm", "flash-vs-t"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

const axisScale = z.enum(["log", "linear"]);

export const figureSpecSchema = z.object({
  input: z.string().min(1),
  kind: z.enum(FIGURE_KINDS),
  output: z.string().min(1),
  xScale: axisScale.optional(),
  yScale: axisScale.optional(),
});

export type FigureSpec = z.infer<typeof figureSpecSchema>;

/** Normalize a user-supplied kind string (the canonical names are lowercase). */
export function parseKind(raw: string): FigureKind {
  const kind = raw.toLowerCase();
  const match = FIGURE_KINDS.find((k) => k === kind);
  if (!match) {
    throw new Error(`unknown figure kind ${JSON.stringify(raw)}; expected one of ${FIGURE_KINDS.join(", ")}`);
  }
  return match;
}

/** Default axis scales per figure kind (the sweep figures are log-log). */
export function defaultScales(kind: FigureKind): { x: "log" | "linear"; y: "log" | "linear" } {
  return kind === "flash-vs-t" ? { x: "linear", y: "linear" } : { x: "log", y: "log" };
}
