// Minimal canvas charts: session bars, cumulative lines, battleground pairs.
// Each chart exports itself as a PNG. Absent averages render as "no data",
// never as a zero bar.

export interface LineSeries {
  label: string;
  color: string;
  values: Array<number | null>; // null = no data yet; the line breaks there
}

export interface BarDatum {
  label: string;
  value: number | null;
  color: string;
}

const FONT = "11px system-ui, sans-serif";
const AXIS_COLOR = "#667";
const GRID_COLOR = "#e3e6ee";

function prepare(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = FONT;
  return ctx;
}

export function drawLineChart(
  canvas: HTMLCanvasElement,
  title: string,
  t: number[],
  series: LineSeries[],
): void {
  const ctx = prepare(canvas);
  const { width, height } = canvas;
  const pad = { left: 44, right: 10, top: 22, bottom: 20 };
  ctx.fillStyle = "#223";
  ctx.fillText(title, 6, 14);
  if (t.length === 0 || series.every((s) => s.values.length === 0)) {
    ctx.fillStyle = AXIS_COLOR;
    ctx.fillText("no data", width / 2 - 18, height / 2);
    return;
  }
  const tMax = t[t.length - 1] || 1;
  const present = series.flatMap((s) =>
    s.values.filter((v): v is number => v !== null),
  );
  const vMax = Math.max(1e-9, ...present);
  const x = (ms: number) =>
    pad.left + ((width - pad.left - pad.right) * ms) / tMax;
  const y = (v: number) =>
    height - pad.bottom - ((height - pad.top - pad.bottom) * v) / vMax;

  ctx.strokeStyle = GRID_COLOR;
  ctx.beginPath();
  for (let g = 0; g <= 4; g++) {
    const gy = pad.top + ((height - pad.top - pad.bottom) * g) / 4;
    ctx.moveTo(pad.left, gy);
    ctx.lineTo(width - pad.right, gy);
  }
  ctx.stroke();
  ctx.fillStyle = AXIS_COLOR;
  ctx.fillText(formatValue(vMax), 4, pad.top + 4);
  ctx.fillText("0", 4, height - pad.bottom);
  ctx.fillText(`${(tMax / 1000).toFixed(1)}s`, width - pad.right - 30, height - 6);

  let legendX = pad.left;
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    let drawing = false;
    s.values.forEach((v, i) => {
      if (v === null) {
        drawing = false; // "no data" gaps break the line, they are not zero
        return;
      }
      const px = x(t[i]);
      const py = y(v);
      if (drawing) ctx.lineTo(px, py);
      else ctx.moveTo(px, py);
      drawing = true;
    });
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, legendX, 14);
    legendX += ctx.measureText(s.label).width + 14;
  }
}

export function drawBarChart(
  canvas: HTMLCanvasElement,
  title: string,
  data: BarDatum[],
): void {
  const ctx = prepare(canvas);
  const { width, height } = canvas;
  const pad = { left: 10, right: 10, top: 24, bottom: 20 };
  ctx.fillStyle = "#223";
  ctx.fillText(title, 6, 14);
  const present = data.filter((d) => d.value !== null) as Array<
    BarDatum & { value: number }
  >;
  const vMax = Math.max(1, ...present.map((d) => d.value));
  const slot = (width - pad.left - pad.right) / data.length;
  data.forEach((d, i) => {
    const cx = pad.left + slot * i;
    ctx.fillStyle = AXIS_COLOR;
    ctx.fillText(d.label, cx + 4, height - 6);
    if (d.value === null) {
      ctx.fillText("no data", cx + 4, height - pad.bottom - 8);
      return;
    }
    const h = ((height - pad.top - pad.bottom) * d.value) / vMax;
    ctx.fillStyle = d.color;
    ctx.fillRect(cx + 4, height - pad.bottom - h, slot - 16, h);
    ctx.fillStyle = "#223";
    ctx.fillText(formatValue(d.value), cx + 4, height - pad.bottom - h - 4);
  });
}

export function formatValue(v: number): string {
  if (v >= 1000) return v >= 100_000 ? `${Math.round(v / 1000)}k` : `${(v / 1000).toFixed(1)}k`;
  if (Number.isInteger(v)) return String(v);
  return v.toFixed(2);
}

export function sessionBars(session: {
  avg_queue_wait_ms: number | null;
  avg_execution_ms: number | null;
}): BarDatum[] {
  return [
    { label: "avg queue wait (ms)", value: session.avg_queue_wait_ms, color: "#e8a13c" },
    { label: "avg execution (ms)", value: session.avg_execution_ms, color: "#4d7fd6" },
  ];
}

export function exportPng(canvas: HTMLCanvasElement, filename: string): void {
  const link = document.createElement("a");
  link.href = canvas.toDataURL("image/png");
  link.download = filename;
  link.click();
}
