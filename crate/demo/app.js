// Plain-canvas front end for the qcurv wasm bindings. No framework; a single
// plot helper with log axes and a legend.

import init, { analyze_family, potential_farfield, volume_entropy } from "./pkg/qcurv_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#2f6fde", "#d9542b", "#2b9e4e", "#8d4fd1"];

const PARAM_LABELS = {
  flat: ["(unused)", 0],
  sphere: ["(unused)", 0],
  nonnormal: ["β", 1.0],
  monomial: ["k", 1],
  potential: ["α", 0.5],
};

function niceTicks(lo, hi, count) {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) ticks.push(v);
  return ticks;
}

function plot(canvas, curves, opts = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  ctx.clearRect(0, 0, W, H);
  const margin = { l: 70, r: 16, t: 14, b: 38 };
  const xs = curves.flatMap((c) => c.x);
  let ys = curves.flatMap((c) => c.y).filter((v) => Number.isFinite(v));
  if (opts.clipQuantile) {
    const sorted = [...ys].sort((a, b) => a - b);
    const lo = sorted[Math.floor(sorted.length * 0.01)];
    const hi = sorted[Math.ceil(sorted.length * 0.99) - 1];
    ys = ys.filter((v) => v >= lo && v <= hi);
  }
  const fx = opts.logx ? Math.log10 : (v) => v;
  const xlo = Math.min(...xs.map(fx)), xhi = Math.max(...xs.map(fx));
  let ylo = Math.min(...ys), yhi = Math.max(...ys);
  if (ylo === yhi) { ylo -= 1; yhi += 1; }
  const pad = 0.05 * (yhi - ylo);
  ylo -= pad; yhi += pad;
  const X = (v) => margin.l + ((fx(v) - xlo) / (xhi - xlo)) * (W - margin.l - margin.r);
  const Y = (v) => H - margin.b - ((v - ylo) / (yhi - ylo)) * (H - margin.t - margin.b);

  ctx.strokeStyle = "#eee";
  ctx.fillStyle = "#666";
  ctx.font = "11px system-ui";
  ctx.textAlign = "center";
  const xticks = opts.logx
    ? niceTicks(Math.ceil(xlo), Math.floor(xhi), 8).filter(Number.isInteger)
    : niceTicks(xlo, xhi, 8);
  for (const t of xticks) {
    const px = margin.l + ((t - xlo) / (xhi - xlo)) * (W - margin.l - margin.r);
    ctx.beginPath(); ctx.moveTo(px, margin.t); ctx.lineTo(px, H - margin.b); ctx.stroke();
    ctx.fillText(opts.logx ? `1e${t}` : t.toPrecision(3), px, H - margin.b + 16);
  }
  ctx.textAlign = "right";
  for (const t of niceTicks(ylo, yhi, 6)) {
    ctx.beginPath(); ctx.moveTo(margin.l, Y(t)); ctx.lineTo(W - margin.r, Y(t)); ctx.stroke();
    ctx.fillText(Math.abs(t) >= 1e5 || (Math.abs(t) < 1e-3 && t !== 0) ? t.toExponential(1) : t.toPrecision(4), margin.l - 6, Y(t) + 4);
  }
  ctx.strokeStyle = "#999";
  ctx.strokeRect(margin.l, margin.t, W - margin.l - margin.r, H - margin.t - margin.b);

  curves.forEach((c, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    let pen = false;
    for (let j = 0; j < c.x.length; j++) {
      const v = c.y[j];
      if (!Number.isFinite(v) || v < ylo || v > yhi) { pen = false; continue; }
      const px = X(c.x[j]), py = Y(v);
      if (pen) ctx.lineTo(px, py); else { ctx.moveTo(px, py); pen = true; }
    }
    ctx.stroke();
    ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.textAlign = "left";
    ctx.fillText(c.label, margin.l + 10, margin.t + 16 + 14 * i);
  });
}

function fmt(v, digits = 4) {
  if (v === null || v === undefined) return "—";
  if (!Number.isFinite(v)) return v > 0 ? "∞" : "-∞";
  return Number(v).toPrecision(digits);
}

async function run() {
  const family = $("family").value;
  const param = parseFloat($("param").value);
  const n = parseInt($("dim").value, 10);
  $("run").disabled = true;
  $("status").textContent = "computing…";
  await new Promise((r) => setTimeout(r, 30)); // let the spinner paint
  try {
    const t0 = performance.now();
    const a = JSON.parse(analyze_family(family, param, n, 121));
    if (a.error) throw new Error(a.error);
    plot($("profiles"), a.curves, { logx: true, clipQuantile: true });

    const v = JSON.parse(volume_entropy(family, param, n));
    if (v.error) throw new Error(v.error);
    plot($("volume"), v.curves, { logx: true });

    let potLine = "";
    if (family === "potential") {
      const p = JSON.parse(potential_farfield(param, n));
      if (p.error) throw new Error(p.error);
      plot($("potential"), p.curves, { logx: true });
      potLine = `far-field slope  ${fmt(p.fitted_slope)}  (predicted ${fmt(p.predicted_slope)}, band ${fmt(p.band, 2)})\n`;
    } else {
      const ctx = $("potential").getContext("2d");
      ctx.clearRect(0, 0, 1000, 320);
      ctx.fillStyle = "#999";
      ctx.font = "13px system-ui";
      ctx.fillText("select the potential family to populate this plot", 40, 40);
    }
    const ms = performance.now() - t0;
    $("summary").textContent =
      `family           ${a.family}   (n = ${a.n})\n` +
      `alpha0           ${fmt(a.alpha0)}\n` +
      `tau(g)           ${a.tau_diverging ? "diverging (non-normal)" : fmt(a.tau)}\n` +
      `h(g)             raw ${fmt(a.h_raw)};  nearest even integer ${a.h_snapped}\n` +
      `verdict          ${a.verdict}\n` +
      `ray to infinity  ${a.ray}\n` +
      `min R_g on grid  ${fmt(a.min_scalar)}\n` +
      potLine +
      `computed in      ${fmt(ms / 1000, 3)} s`;
    $("status").textContent = "";
  } catch (e) {
    $("status").textContent = String(e);
  } finally {
    $("run").disabled = false;
  }
}

function syncParamLabel() {
  const [label, dflt] = PARAM_LABELS[$("family").value];
  $("paramLabel").textContent = label;
  $("param").value = dflt;
  $("param").disabled = label === "(unused)";
}

await init();
$("family").addEventListener("change", syncParamLabel);
$("run").addEventListener("click", run);
syncParamLabel();
run();
