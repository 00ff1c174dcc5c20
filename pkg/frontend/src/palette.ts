/** State coding that stays readable without color vision.
 *
 * Every state gets a color AND a glyph, and neighbouring states keep a wide
 * luminance gap, so no pair of states is told apart by hue alone. The audit
 * module enforces this pairwise on whatever is actually rendered.
 */

export interface StateStyle {
  /** #rrggbb */
  color: string;
  /** printable marker rendered next to the color chip */
  glyph: string;
  label: string;
}

export const STATE_STYLES: Record<string, StateStyle> = {
  on: { color: "#F2B705", glyph: "●", label: "on" }, // filled dot, bright amber
  off: { color: "#1D3557", glyph: "○", label: "off" }, // hollow dot, dark navy
  active: { color: "#0072B2", glyph: "▲", label: "active" },
  idle: { color: "#BBBBBB", glyph: "▽", label: "idle" },
  alert: { color: "#D55E00", glyph: "!", label: "alert" },
  locked: { color: "#332288", glyph: "✖", label: "locked" },
  unlocked: { color: "#88CCEE", glyph: "✔", label: "unlocked" },
  disabled: { color: "#444444", glyph: "⊘", label: "disabled" },
  unavailable: { color: "#999999", glyph: "?", label: "unavailable" },
  true: { color: "#117733", glyph: "✔", label: "true" },
  false: { color: "#DDCC77", glyph: "✖", label: "false" },
};

export function styleFor(key: string): StateStyle {
  return STATE_STYLES[key] ?? STATE_STYLES["unavailable"]!;
}

function channel(hex: string, offset: number): number {
  return parseInt(hex.slice(offset, offset + 2), 16) / 255;
}

function linear(c: number): number {
  return c <= 0.04045 ? c / 12.92 : Math.pow((c + 0.055) / 1.055, 2.4);
}

/** WCAG relative luminance of a #rrggbb color. */
export function relativeLuminance(hex: string): number {
  const h = hex.replace("#", "");
  if (!/^[0-9a-fA-F]{6}$/.test(h)) {
    throw new Error(`not a #rrggbb color: ${hex}`);
  }
  return (
    0.2126 * linear(channel(h, 0)) +
    0.7152 * linear(channel(h, 2)) +
    0.0722 * linear(channel(h, 4))
  );
}

/** Minimum luminance gap below which two same-glyph states read as hue-only. */
export const LUMINANCE_GAP = 0.15;

/** True when two rendered states are distinguished by hue alone. */
export function hueOnlyPair(
  a: { color: string; glyph: string },
  b: { color: string; glyph: string },
): boolean {
  if (a.glyph !== b.glyph) {
    return false;
  }
  return Math.abs(relativeLuminance(a.color) - relativeLuminance(b.color)) < LUMINANCE_GAP;
}

export function rgbCss(color: [number, number, number] | number[]): string {
  return `rgb(${color[0]}, ${color[1]}, ${color[2]})`;
}
