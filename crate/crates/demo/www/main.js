import init, { twoBond, checkMarket, superReplicate } from "./pkg/staticarb_demo.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (typeof x === "number" ? +x.toPrecision(8) : x);

function setLevel(el, result) {
  const level = result.error ? "error" : result.level;
  el.textContent = result.error ? result.error : level;
  el.className = "level " + level;
}

// Line plot of one or more [t, y] series, with optional knot markers.
function plotCurves(canvas, series, knots) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 32;
  ctx.clearRect(0, 0, w, h);
  const pts = series.flatMap((s) => s.points);
  if (pts.length === 0) return;
  const tMax = Math.max(...pts.map((p) => p[0])) || 1;
  const yMin = Math.min(0, ...pts.map((p) => p[1]));
  const yMax = Math.max(1.05, ...pts.map((p) => p[1]));
  const X = (t) => pad + (t / tMax) * (w - 2 * pad);
  const Y = (y) => h - pad - ((y - yMin) / (yMax - yMin)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(pad, Y(0));
  ctx.lineTo(w - pad, Y(0));
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#666";
  ctx.font = "11px sans-serif";
  ctx.fillText("1", 4, Y(1) + 4);
  ctx.fillText("0", 4, Y(0) + 4);
  ctx.fillText(`t = ${fmt(tMax)}`, w - pad - 40, h - 8);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    s.points.forEach(([t, y], i) => (i ? ctx.lineTo(X(t), Y(y)) : ctx.moveTo(X(t), Y(y))));
    ctx.stroke();
    ctx.setLineDash([]);
  }
  if (knots) {
    ctx.fillStyle = "#222";
    knots.times.forEach((t, i) => {
      ctx.beginPath();
      ctx.arc(X(t), Y(knots.values[i]), 3, 0, 2 * Math.PI);
      ctx.fill();
    });
  }
}

function plotBars(canvas, grid, groups) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 32;
  ctx.clearRect(0, 0, w, h);
  const all = groups.flatMap((g) => g.values);
  const top = Math.max(1e-12, ...all.map(Math.abs));
  const slot = (w - 2 * pad) / grid.length;
  const bar = slot / (groups.length + 1);
  const mid = h / 2;
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, mid);
  ctx.lineTo(w - pad, mid);
  ctx.stroke();
  ctx.font = "11px sans-serif";
  grid.forEach((t, j) => {
    groups.forEach((g, k) => {
      const v = g.values[j];
      const len = (v / top) * (mid - pad);
      ctx.fillStyle = g.color;
      ctx.fillRect(pad + j * slot + k * bar + bar / 2, mid - Math.max(len, 0), bar * 0.9, Math.abs(len));
    });
    ctx.fillStyle = "#666";
    ctx.fillText(`t=${fmt(t)}`, pad + j * slot + bar / 2, h - 6);
  });
  groups.forEach((g, k) => {
    ctx.fillStyle = g.color;
    ctx.fillRect(w - 150, 8 + k * 16, 10, 10);
    ctx.fillStyle = "#222";
    ctx.fillText(g.label, w - 135, 17 + k * 16);
  });
}

function summary(result, keys) {
  if (result.error) return result.error;
  const out = {};
  for (const k of keys) if (k in result) out[k] = Array.isArray(result[k]) ? result[k].map(fmt) : fmt(result[k]);
  return JSON.stringify(out, null, 2);
}

function updateTwoBond() {
  const c = parseFloat($("coupon").value);
  const p = parseFloat($("price").value);
  $("coupon-val").textContent = c.toFixed(3);
  $("price-val").textContent = p.toFixed(3);
  const r = JSON.parse(twoBond(c, p));
  setLevel($("two-bond-level"), r);
  const series = [];
  if (r.curve) series.push({ points: r.curve, color: r.level === "ArbitrageFree" ? "#1a7f37" : "#b35900" });
  if (r.nonnegative_curve && r.level !== "ArbitrageFree") series.push({ points: r.nonnegative_curve, color: "#888", dash: [4, 4] });
  plotCurves($("two-bond-plot"), series, r.knots);
  $("two-bond-out").textContent = summary(r, ["level", "portfolio", "portfolio_price", "portfolio_cashflows"]);
}

function runCheck() {
  const r = JSON.parse(checkMarket($("check-inst").value, $("check-cf").value));
  setLevel($("check-level"), r);
  plotCurves($("check-plot"), r.curve ? [{ points: r.curve, color: "#1f5fbf" }] : [], r.knots);
  $("check-out").textContent = summary(r, ["level", "non_unique", "ids", "portfolio", "portfolio_price", "portfolio_cashflows"]);
}

function runSuperrep() {
  const r = JSON.parse(superReplicate($("sr-inst").value, $("sr-cf").value, $("sr-liab").value));
  if (!r.error) {
    plotBars($("sr-plot"), r.grid, [
      { label: "liabilities", values: r.liabilities, color: "#c62828" },
      { label: "portfolio flows", values: r.portfolio_cashflows, color: "#1f5fbf" },
    ]);
  } else {
    $("sr-plot").getContext("2d").clearRect(0, 0, 640, 220);
  }
  $("sr-out").textContent = summary(r, ["cost", "ids", "portfolio", "dual_discount", "possibly_non_unique"]);
}

await init();
$("coupon").addEventListener("input", updateTwoBond);
$("price").addEventListener("input", updateTwoBond);
$("check-run").addEventListener("click", runCheck);
$("sr-run").addEventListener("click", runSuperrep);
updateTwoBond();
runCheck();
runSuperrep();
