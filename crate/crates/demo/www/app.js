import init, { interpolate, detection, study } from "./pkg/morphlab_demo.js";

await init();

const $ = (id) => document.getElementById(id);

function report(out, data) {
  out.className = data.error ? "err" : "";
  return data.error ? (out.textContent = data.error, null) : data;
}

function axes(ctx, w, h, pad) {
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function polyline(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
  ctx.lineWidth = 1;
}

// Interpolation paths.

const ends = { a: [1.6, 0.4], b: [-0.3, 1.2] };
const ic = $("interp");
const scale = ic.width / 5;
const toPx = ([x, y]) => [ic.width / 2 + x * scale, ic.height / 2 - y * scale];
const fromPx = (px, py) => [(px - ic.width / 2) / scale, (ic.height / 2 - py) / scale];

function drawInterp() {
  const ctx = ic.getContext("2d");
  ctx.clearRect(0, 0, ic.width, ic.height);
  ctx.strokeStyle = "#eee";
  ctx.beginPath();
  ctx.moveTo(0, ic.height / 2); ctx.lineTo(ic.width, ic.height / 2);
  ctx.moveTo(ic.width / 2, 0); ctx.lineTo(ic.width / 2, ic.height);
  ctx.stroke();
  const data = report($("interp-out"), JSON.parse(interpolate(...ends.a, ...ends.b, 32)));
  if (data) {
    polyline(ctx, data.lerp.map(toPx), "#1f77b4");
    polyline(ctx, data.slerp.map(toPx), "#ff7f0e");
    $("interp-out").textContent = `angle ${(data.angle * 180 / Math.PI).toFixed(1)} deg`;
  }
  for (const [name, p] of Object.entries(ends)) {
    const [x, y] = toPx(p);
    ctx.fillStyle = "#333";
    ctx.beginPath(); ctx.arc(x, y, 6, 0, 2 * Math.PI); ctx.fill();
    ctx.fillText(name, x + 8, y - 8);
  }
}

let dragging = null;
ic.addEventListener("pointerdown", (e) => {
  const p = fromPx(e.offsetX, e.offsetY);
  const d = (q) => Math.hypot(q[0] - p[0], q[1] - p[1]);
  dragging = d(ends.a) < d(ends.b) ? "a" : "b";
});
ic.addEventListener("pointermove", (e) => {
  if (dragging) { ends[dragging] = fromPx(e.offsetX, e.offsetY); drawInterp(); }
});
addEventListener("pointerup", () => (dragging = null));
drawInterp();

// DET curve.

function drawDet() {
  const c = $("det"), ctx = c.getContext("2d"), pad = 30;
  ctx.clearRect(0, 0, c.width, c.height);
  axes(ctx, c.width, c.height, pad);
  ctx.fillStyle = "#333";
  ctx.fillText("BPCER", c.width / 2, c.height - 8);
  ctx.fillText("APCER", 2, pad - 10);
  const data = report($("det-out"),
    JSON.parse(detection(+$("sep").value, +$("n").value, +$("det-seed").value)));
  if (!data) return;
  const span = c.width - 2 * pad;
  polyline(ctx, data.curve.map(([a, b]) => [pad + b * span, c.height - pad - a * span]), "#2ca02c");
  ctx.strokeStyle = "#ddd";
  ctx.beginPath(); ctx.moveTo(pad, c.height - pad); ctx.lineTo(c.width - pad, pad); ctx.stroke();
  const at = data.apcer_at
    .map(([t, a, deg]) => `APCER@BPCER${(t * 100).toFixed(0)}% ${(a * 100).toFixed(2)}%${deg ? " (degenerate)" : ""}`)
    .join(", ");
  $("det-out").textContent = `EER ${(data.eer * 100).toFixed(2)}% at ${data.eer_threshold.toFixed(3)}; ${at}`;
}
for (const id of ["sep", "n", "det-seed"]) $(id).addEventListener("input", drawDet);
drawDet();

// Toy study.

function drawStudy() {
  const c = $("study"), ctx = c.getContext("2d"), pad = 30;
  ctx.clearRect(0, 0, c.width, c.height);
  axes(ctx, c.width, c.height, pad);
  const data = report($("study-out"), JSON.parse(study(
    +$("subjects").value, +$("k").value, +$("lambda").value, +$("study-seed").value)));
  if (!data) return;
  const x = (t) => pad + t * (c.width - 2 * pad);
  const y = (r) => c.height - pad - r * (c.height - 2 * pad);
  polyline(ctx, data.thresholds.map((t, i) => [x(t), y(data.selected[i])]), "#d62728");
  polyline(ctx, data.thresholds.map((t, i) => [x(t), y(data.random[i])]), "#7f7f7f");
  ctx.strokeStyle = "#1f77b4";
  ctx.setLineDash([4, 4]);
  ctx.beginPath(); ctx.moveTo(x(data.fmr1), pad); ctx.lineTo(x(data.fmr1), c.height - pad); ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = "#333";
  ctx.fillText("threshold", c.width / 2, c.height - 8);
  ctx.fillText("MMPMR", 2, pad - 10);
  const i = data.thresholds.findIndex((t) => t >= data.fmr1);
  $("study-out").textContent =
    `${data.pairs} pairs each; at FMR 1% (threshold ${data.fmr1.toFixed(3)}): ` +
    `selected ${data.selected[i].toFixed(3)}, random ${data.random[i].toFixed(3)}`;
}
$("run").addEventListener("click", drawStudy);
drawStudy();
