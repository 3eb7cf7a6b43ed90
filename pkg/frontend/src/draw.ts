/** Structural subset of CanvasRenderingContext2D the painters use.
 * Real 2D contexts satisfy it as-is; tests pass a recording stub, so
 * painting logic runs headless without a native canvas.
 */

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  closePath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number,
      ccw?: boolean): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(rad: number): void;
}

export const palette = {
  bg: "#11151c",
  panel: "#1a202c",
  grid: "#2d3748",
  text: "#cbd5e0",
  dim: "#718096",
  accent: "#63b3ed",
  ref: "#f6ad55",
  good: "#48bb78",
  warn: "#ecc94b",
  bad: "#f56565",
  broken: "#718096",
} as const;
