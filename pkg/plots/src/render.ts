import * as fs from "node:fs";

import { FigureKind, FigureSpec, defaultScales } from "./figure";
import { SchemaError, SweepRow, effectiveOccupation, parseFlashCsv, parseSweepCsv } from "./schema";
import { Series, renderChart } from "./svg";

/** Caption style mapping: cumulant order -> color, atom count -> dash pattern. */
export const ORDER_COLORS: Record<1 | 2 | 3 | 4, string> = {
  1: "black",
  2: "red",
  3: "green",
  4: "blue",
};

export const SIZE_DASHES: Record<number, string> = {
  1: "",          // solid
  2: "9 5",       // dashed
  4: "9 4 2 4",   // dash-dotted
  8: "2 4",       // dotted
};

const FALLBACK_DASHES = ["", "9 5", "9 4 2 4", "2 4", "14 4", "5 2 1 2"];

export function dashForSize(n: number, index: number): string {
  return SIZE_DASHES[n] ?? FALLBACK_DASHES[index % FALLBACK_DASHES.length];
}

function sweepSizes(rows: SweepRow[]): number[] {
  return [...new Set(rows.map((r) => r.N))].sort((a, b) => a - b);
}

function cumulantSeries(rows: SweepRow[]): Series[] {
  const series: Series[] = [];
  const sizes = sweepSizes(rows);
  for (const order of [1, 2, 3, 4] as const) {
    for (const [index, n] of sizes.entries()) {
      const points = rows
        .filter((r) => r.N === n && r.C[order] !== null)
        .map((r) => ({ x: r.sweepVar, y: Math.abs(r.C[order] as number) }));
      if (points.length === 0) continue;
      series.push({
        label: `|C${order}|, N=${n}`,
        color: ORDER_COLORS[order],
        dash: dashForSize(n, index),
        points,
        attributes: { "data-order": order, "data-size": n },
      });
    }
  }
  if (series.length === 0) {
    throw new SchemaError("sweep CSV contains no cumulant data");
  }
  return series;
}

function sigmaSeries(rows: SweepRow[]): Series[] {
  const series: Series[] = [];
  const sizes = sweepSizes(rows);
  for (const [index, n] of sizes.entries()) {
    const points = rows
      .filter((r) => r.N === n && r.sigmaN !== null)
      .map((r) => ({ x: effectiveOccupation(r), y: r.sigmaN as number }));
    if (points.length === 0) continue;
    series.push({
      label: `sigma_N, N=${n}`,
      color: "black",
      dash: dashForSize(n, index),
      points,
      attributes: { "data-size": n },
    });
  }
  if (series.length === 0) {
    throw new SchemaError("sweep CSV contains no collectivity data");
  }
  return series;
}

/** Render a figure to an SVG string (throws SchemaError on bad input). */
export function renderFigure(spec: FigureSpec): string {
  const text = fs.readFileSync(spec.input, "utf-8");
  const scales = {
    x: spec.xScale ?? defaultScales(spec.kind).x,
    y: spec.yScale ?? defaultScales(spec.kind).y,
  };
  if (spec.kind === "flash-vs-t") {
    const rows = parseFlashCsv(text);
    return renderChart(
      [
        {
          label: "emission rate",
          color: "black",
          dash: "",
          points: rows.map((r) => ({ x: r.t, y: r.rate })),
        },
      ],
      {
        title: "Collective emission flash",
        xLabel: "t",
        yLabel: "d<n>/dt",
        xScale: scales.x,
        yScale: scales.y,
      },
    );
  }
  const rows = parseSweepCsv(text);
  if (spec.kind === "cumulants-vs-ns") {
    return renderChart(cumulantSeries(rows), {
      title: "Current cumulants vs source occupation",
      xLabel: "n_S",
      yLabel: "|C_k|",
      xScale: scales.x,
      yScale: scales.y,
    });
  }
  return renderChart(sigmaSeries(rows), {
    title: "Collectivity factor vs effective occupation",
    xLabel: "n_M",
    yLabel: "sigma_N",
    xScale: scales.x,
    yScale: scales.y,
  });
}

/** Render and write; nothing is written if rendering fails. */
export function renderToFile(spec: FigureSpec): void {
  const svg = renderFigure(spec);
  fs.writeFileSync(spec.output, svg, "utf-8");
}

export type { FigureKind, FigureSpec };
