/** Loss exceedance curve as standalone SVG markup.
 *
 * The x axis is logarithmic over the positive thresholds returned by the
 * server; the zero-loss probability is not part of the curve and is drawn as
 * a separate marker at the left edge. Geometry only: the plotted values are
 * exactly the response pairs. */

export interface ChartLayout {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 660,
  height: 300,
  marginLeft: 56,
  marginRight: 16,
  marginTop: 14,
  marginBottom: 40,
};

export function logTicks(min: number, max: number): number[] {
  if (!(min > 0) || !(max >= min)) {
    return [];
  }
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(min)); Math.pow(10, e) <= max; e += 1) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

export function xScale(threshold: number, min: number, max: number, layout: ChartLayout): number {
  const span = Math.log10(max) - Math.log10(min);
  const unit = span === 0 ? 0.5 : (Math.log10(threshold) - Math.log10(min)) / span;
  return layout.marginLeft + unit * (layout.width - layout.marginLeft - layout.marginRight);
}

export function yScale(probability: number, layout: ChartLayout): number {
  const inner = layout.height - layout.marginTop - layout.marginBottom;
  return layout.marginTop + (1 - probability) * inner;
}

export function curvePath(
  curve: [number, number][],
  layout: ChartLayout = DEFAULT_LAYOUT,
): string {
  if (curve.length === 0) {
    return "";
  }
  const first = curve[0]!;
  const last = curve[curve.length - 1]!;
  const min = first[0];
  const max = last[0];
  return curve
    .map(([t, p], i) => {
      const cmd = i === 0 ? "M" : "L";
      return `${cmd}${xScale(t, min, max, layout).toFixed(2)},${yScale(p, layout).toFixed(2)}`;
    })
    .join(" ");
}

function tickLabel(value: number): string {
  return value >= 1e6 ? `1e${Math.round(Math.log10(value))}` : String(value);
}

export function exceedanceChartSvg(
  curve: [number, number][],
  zeroLossProbability: number,
  layout: ChartLayout = DEFAULT_LAYOUT,
): string {
  const { width, height } = layout;
  const parts: string[] = [
    `<svg viewBox="0 0 ${width} ${height}" class="lec" role="img" aria-label="loss exceedance curve">`,
  ];
  const bottom = height - layout.marginBottom;

  for (const p of [0, 0.25, 0.5, 0.75, 1.0]) {
    const y = yScale(p, layout);
    parts.push(
      `<line class="grid" x1="${layout.marginLeft}" y1="${y.toFixed(2)}" x2="${width - layout.marginRight}" y2="${y.toFixed(2)}"/>`,
      `<text class="tick" x="${layout.marginLeft - 6}" y="${(y + 3).toFixed(2)}" text-anchor="end">${p}</text>`,
    );
  }

  if (curve.length > 0) {
    const min = curve[0]![0];
    const max = curve[curve.length - 1]![0];
    for (const tick of logTicks(min, max)) {
      const x = xScale(tick, min, max, layout);
      parts.push(
        `<line class="grid" x1="${x.toFixed(2)}" y1="${layout.marginTop}" x2="${x.toFixed(2)}" y2="${bottom}"/>`,
        `<text class="tick" x="${x.toFixed(2)}" y="${bottom + 16}" text-anchor="middle">${tickLabel(tick)}</text>`,
      );
    }
    parts.push(`<path class="curve" d="${curvePath(curve, layout)}" fill="none"/>`);
  } else {
    parts.push(
      `<text class="tick" x="${width / 2}" y="${height / 2}" text-anchor="middle">no positive losses</text>`,
    );
  }

  // zero-loss probability: separate marker, not a curve point; the label is
  // the response field verbatim (no 1-p recomputation client-side)
  const zy = yScale(zeroLossProbability, layout);
  parts.push(
    `<circle class="zero-loss" cx="${layout.marginLeft}" cy="${zy.toFixed(2)}" r="4"/>`,
    `<text class="tick zero-loss-label" x="${layout.marginLeft + 8}" y="${(zy - 6).toFixed(2)}">P(loss = 0) = ${String(zeroLossProbability)}</text>`,
  );
  parts.push(
    `<text class="axis-label" x="${(layout.marginLeft + width - layout.marginRight) / 2}" y="${height - 6}" text-anchor="middle">annual loss threshold (log scale)</text>`,
    "</svg>",
  );
  return parts.join("");
}
