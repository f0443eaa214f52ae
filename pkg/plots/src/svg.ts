/** Minimal deterministic SVG line-chart builder (no DOM, no timestamps). */

export type Scale = "log" | "linear";

export interface Series {
  label: string;
  color: string;
  dash: string; // "" for solid
  points: Array<{ x: number; y: number }>;
  /** free-form data attributes rendered onto the path element */
  attributes?: Record<string, string | number>;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  width?: number;
  height?: number;
}

const MARGIN = { top: 40, right: 200, bottom: 52, left: 72 };

function transformer(scale: Scale, domain: [number, number], range: [number, number]) {
  const [d0, d1] = scale === "log" ? [Math.log10(domain[0]), Math.log10(domain[1])] : domain;
  const span = d1 - d0 || 1;
  return (value: number) => {
    const v = scale === "log" ? Math.log10(value) : value;
    return range[0] + ((v - d0) / span) * (range[1] - range[0]);
  };
}

function ticks(scale: Scale, domain: [number, number]): number[] {
  if (scale === "log") {
    const lo = Math.ceil(Math.log10(domain[0]) - 1e-9);
    const hi = Math.floor(Math.log10(domain[1]) + 1e-9);
    const out: number[] = [];
    const stride = Math.max(1, Math.ceil((hi - lo) / 9));
    for (let e = lo; e <= hi; e += stride) out.push(10 ** e);
    return out;
  }
  const raw = (domain[1] - domain[0]) / 6 || 1;
  const power = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 5, 10].map((m) => m * power).find((s) => s >= raw) ?? raw;
  const out: number[] = [];
  for (let v = Math.ceil(domain[0] / step) * step; v <= domain[1] + 1e-12; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

function tickLabel(value: number, scale: Scale): string {
  if (scale === "log") {
    const exponent = Math.round(Math.log10(value));
    return `1e${exponent}`;
  }
  return Number(value.toPrecision(6)).toString();
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function dataDomain(series: Series[], axis: "x" | "y", scale: Scale): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      const v = p[axis];
      if (scale === "log" && v <= 0) continue;
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    throw new Error("no plottable data points");
  }
  if (lo === hi) {
    lo = scale === "log" ? lo / 2 : lo - 1;
    hi = scale === "log" ? hi * 2 : hi + 1;
  }
  return [lo, hi];
}

/** Render a multi-series line chart to an SVG string. */
export function renderChart(series: Series[], options: ChartOptions): string {
  const width = options.width ?? 760;
  const height = options.height ?? 540;
  const plotW: [number, number] = [MARGIN.left, width - MARGIN.right];
  const plotH: [number, number] = [height - MARGIN.bottom, MARGIN.top];
  const xDomain = dataDomain(series, "x", options.xScale);
  const yDomain = dataDomain(series, "y", options.yScale);
  const sx = transformer(options.xScale, xDomain, plotW);
  const sy = transformer(options.yScale, yDomain, plotH);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${(plotW[0] + plotW[1]) / 2}" y="22" text-anchor="middle" font-size="15">${escapeXml(options.title)}</text>`,
  );

  for (const tick of ticks(options.xScale, xDomain)) {
    const x = sx(tick).toFixed(2);
    parts.push(
      `<line x1="${x}" y1="${plotH[0]}" x2="${x}" y2="${plotH[1]}" stroke="#dddddd" stroke-width="1"/>`,
      `<text x="${x}" y="${plotH[0] + 18}" text-anchor="middle" font-size="11">${tickLabel(tick, options.xScale)}</text>`,
    );
  }
  for (const tick of ticks(options.yScale, yDomain)) {
    const y = sy(tick).toFixed(2);
    parts.push(
      `<line x1="${plotW[0]}" y1="${y}" x2="${plotW[1]}" y2="${y}" stroke="#dddddd" stroke-width="1"/>`,
      `<text x="${plotW[0] - 6}" y="${y}" text-anchor="end" dominant-baseline="middle" font-size="11">${tickLabel(tick, options.yScale)}</text>`,
    );
  }
  parts.push(
    `<rect x="${plotW[0]}" y="${plotH[1]}" width="${plotW[1] - plotW[0]}" height="${plotH[0] - plotH[1]}" fill="none" stroke="black"/>`,
    `<text x="${(plotW[0] + plotW[1]) / 2}" y="${height - 14}" text-anchor="middle" font-size="13">${escapeXml(options.xLabel)}</text>`,
    `<text x="20" y="${(plotH[0] + plotH[1]) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${(plotH[0] + plotH[1]) / 2})">${escapeXml(options.yLabel)}</text>`,
  );

  for (const s of series) {
    const visible = s.points.filter(
      (p) =>
        (options.xScale !== "log" || p.x > 0) && (options.yScale !== "log" || p.y > 0),
    );
    if (visible.length === 0) continue;
    const path = visible
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`)
      .join("");
    const dash = s.dash === "" ? "" : ` stroke-dasharray="${s.dash}"`;
    const extras = Object.entries(s.attributes ?? {})
      .map(([key, value]) => ` ${key}="${escapeXml(String(value))}"`)
      .join("");
    parts.push(
      `<path class="curve" d="${path}" fill="none" stroke="${s.color}" stroke-width="1.6"${dash}${extras}/>`,
    );
  }

  let legendY = MARGIN.top + 8;
  const legendX = plotW[1] + 14;
  for (const s of series) {
    const dash = s.dash === "" ? "" : ` stroke-dasharray="${s.dash}"`;
    parts.push(
      `<line x1="${legendX}" y1="${legendY}" x2="${legendX + 30}" y2="${legendY}" stroke="${s.color}" stroke-width="1.6"${dash}/>`,
      `<text x="${legendX + 36}" y="${legendY + 4}" font-size="11">${escapeXml(s.label)}</text>`,
    );
    legendY += 16;
  }
  parts.push("</svg>");
  return parts.join("\n");
}
