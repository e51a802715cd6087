import init, { entanglementMap, groundSweep, loschmidtEcho } from "./pkg/mgchain_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function chain() {
  return { n: num("n"), nprime: num("nprime"), j2: num("j2"), periodic: $("periodic").checked };
}

// Run `work` after the status text has been painted, reporting errors inline.
function run(msgId, work) {
  const msg = $(msgId);
  msg.className = "";
  msg.textContent = "computing...";
  setTimeout(() => {
    const t0 = performance.now();
    try {
      work();
      msg.textContent = `${((performance.now() - t0) / 1000).toFixed(2)} s`;
    } catch (e) {
      msg.className = "error";
      msg.textContent = e.message ?? String(e);
    }
  }, 20);
}

function plotLines(canvas, xs, series, yRange) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  ctx.clearRect(0, 0, w, h);
  const finite = series.flatMap((s) => s.values.filter(Number.isFinite));
  const [lo, hi] = yRange ?? [Math.min(...finite), Math.max(...finite)];
  const span = hi - lo || 1;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - lo) / span) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(hi.toPrecision(3), 2, pad);
  ctx.fillText(lo.toPrecision(3), 2, h - pad);
  ctx.fillText(String(x0), pad, h - 10);
  ctx.fillText(String(x1), w - pad - 20, h - 10);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let pen = false;
    s.values.forEach((y, i) => {
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y));
      pen = true;
    });
    ctx.stroke();
  }
}

function drawSweep() {
  const c = chain();
  const v = groundSweep(c.n, c.periodic, c.j2, c.nprime, num("hmax"), num("steps"));
  const col = (k) => Array.from({ length: v.length / 5 }, (_, i) => v[5 * i + k]);
  plotLines($("sweep"), col(0), [
    { color: "black", values: col(2) },
    { color: "red", values: col(3) },
    { color: "blue", values: col(4) },
  ]);
}

function drawMap() {
  const c = chain();
  const m = entanglementMap(c.n, c.periodic, c.j2, num("map-h"), c.nprime, num("map-sector"));
  const canvas = $("map");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / c.n;
  for (let i = 0; i < c.n; i++) {
    for (let j = 0; j < c.n; j++) {
      const g = Math.round(255 * (1 - Math.max(0, Math.min(1, m[i * c.n + j]))));
      ctx.fillStyle = `rgb(${g},${g},${g})`;
      ctx.fillRect(j * cell, i * cell, cell, cell);
    }
  }
}

function drawEcho() {
  const c = chain();
  const samples = 2000;
  const tmax = num("q-tmax");
  const le = loschmidtEcho(c.n, c.periodic, c.nprime, num("q-hi"), num("q-hf"), tmax, samples);
  const ts = Array.from(le, (_, i) => (tmax * i) / (samples - 1));
  plotLines($("echo"), ts, [{ color: "black", values: Array.from(le) }], [0, 1]);
}

await init();
$("sweep-run").onclick = () => run("sweep-msg", drawSweep);
$("map-run").onclick = () => run("map-msg", drawMap);
$("q-run").onclick = () => run("q-msg", drawEcho);
