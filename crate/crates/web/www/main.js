import init, { norm_ball, density, touching } from "./pkg/planar_density_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// world box [-s, s]^2 onto a canvas
function view(canvas, s) {
  const ctx = canvas.getContext("2d");
  const k = canvas.width / (2 * s);
  const px = ([x, y]) => [(x + s) * k, (s - y) * k];
  const toWorld = (cx, cy) => [cx / k - s, s - cy / k];
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#eee";
  ctx.beginPath();
  ctx.moveTo(...px([-s, 0])); ctx.lineTo(...px([s, 0]));
  ctx.moveTo(...px([0, -s])); ctx.lineTo(...px([0, s]));
  ctx.stroke();
  return { ctx, px, toWorld };
}

function polyline(v, pts, close, color) {
  v.ctx.strokeStyle = color;
  v.ctx.beginPath();
  pts.forEach((p, i) => (i ? v.ctx.lineTo(...v.px(p)) : v.ctx.moveTo(...v.px(p))));
  if (close) v.ctx.closePath();
  v.ctx.stroke();
}

function call(f, ...args) {
  const r = JSON.parse(f(...args));
  if (r.error) throw new Error(r.error);
  return r;
}

function show(out, f) {
  try {
    f();
  } catch (e) {
    $(out).textContent = "error: " + e.message;
  }
}

const colors = { strict: "#1a7f37", weak: "#9a6700", none: "#cf222e" };

function drawBall() {
  show("ball-out", () => {
    const r = call(norm_ball, $("ball-norm").value, 720, Math.round(num("ball-dirs")));
    const s = 1.1 * Math.max(...r.boundary.map(([x, y]) => Math.hypot(x, y)));
    const v = view($("ball-canvas"), s);
    polyline(v, r.boundary, true, "#000");
    for (const c of r.classes) {
      v.ctx.lineWidth = 2;
      polyline(v, [[0, 0], [c.nu[0] * s * 0.9, c.nu[1] * s * 0.9]], false, colors[c.class]);
      v.ctx.lineWidth = 1;
    }
    $("ball-out").textContent =
      `${r.label}, ball area ${r.area.toFixed(6)}\n` +
      r.classes.map((c) => `ν = (${c.nu.map((t) => t.toFixed(3)).join(", ")})  ${c.class.padEnd(6)} min ${c.min_dot.toExponential(2)}`).join("\n");
  });
}

function drawDensity() {
  show("dens-out", () => {
    const r = call(density, $("dens-norm").value, $("dens-measure").value, Math.round(num("dens-atoms")),
      Math.round(num("dens-seed")), num("dens-cx"), num("dens-cy"));
    const s = 1.1 * Math.max(...r.points.map(([x, y]) => Math.max(Math.abs(x), Math.abs(y))));
    const v = view($("dens-points"), s);
    v.ctx.fillStyle = "#555";
    for (const p of r.points) v.ctx.fillRect(...v.px(p), 1, 1);
    v.ctx.fillStyle = "#cf222e";
    v.ctx.fillRect(...v.px([num("dens-cx"), num("dens-cy")]).map((t) => t - 3), 6, 6);

    const c = $("dens-plot").getContext("2d");
    const W = c.canvas.width, H = c.canvas.height, m = 30;
    c.clearRect(0, 0, W, H);
    const lx = r.radii.map(Math.log10);
    const top = Math.max(...r.values) * 1.2 || 1;
    const X = (t) => m + ((t - lx[0]) / (lx[lx.length - 1] - lx[0])) * (W - 2 * m);
    const Y = (t) => H - m - (t / top) * (H - 2 * m);
    c.strokeStyle = "#999";
    c.strokeRect(m, m, W - 2 * m, H - 2 * m);
    c.strokeStyle = "#0969da";
    c.beginPath();
    r.values.forEach((t, i) => (i ? c.lineTo(X(lx[i]), Y(t)) : c.moveTo(X(lx[i]), Y(t))));
    c.stroke();
    c.fillStyle = "#000";
    c.fillText(`μ(B(x,r)) / r^${r.alpha}  against log r`, m, m - 8);
    c.fillText(`r = ${r.radii[0].toExponential(1)}`, m, H - 10);
    c.fillText(`${r.radii[r.radii.length - 1].toExponential(1)}`, W - m - 40, H - 10);

    const fit = r.fit ? `fitted exponent ${r.fit.alpha.toFixed(4)} (R² ${r.fit.r_squared.toFixed(4)})` : "window too narrow for a fit";
    $("dens-out").textContent =
      `window [${r.window.map((t) => t.toExponential(2)).join(", ")}]\n` +
      `oscillation ${r.oscillation === null ? "n/a" : r.oscillation.toFixed(4)}\n${fit}` +
      (r.warning ? `\n${r.warning}` : "");
  });
}

let center = [0, 0.5];
const T_SCALE = 3;

function drawTouching() {
  show("t-out", () => {
    const r = call(touching, num("t-vx"), num("t-vy"), num("t-wx"), num("t-wy"), center[0], center[1], num("t-slope"));
    const v = view($("t-canvas"), T_SCALE);
    polyline(v, r.line, false, "#555");
    polyline(v, r.vertices, true, "#0969da");
    for (const t of r.touches) {
      v.ctx.fillStyle = t.class === "vertex" ? "#cf222e" : "#1a7f37";
      v.ctx.fillRect(...v.px(t.point).map((q) => q - 3), 6, 6);
    }
    v.ctx.fillStyle = "#000";
    v.ctx.fillRect(...v.px(center).map((q) => q - 2), 4, 4);
    const kinds = [...new Set(r.touches.map((t) => t.class))].join(" + ");
    $("t-out").textContent =
      `center (${center.map((t) => t.toFixed(3)).join(", ")})\nradius ${r.d.toFixed(6)}\n` +
      `${r.touches.length} touching atoms: ${kinds}\n${r.vertex_only ? "vertex only" : "meets an edge"}`;
  });
}

await init();
$("status").textContent = "";
$("ball-run").onclick = drawBall;
$("dens-run").onclick = drawDensity;
for (const id of ["t-vx", "t-vy", "t-wx", "t-wy", "t-slope"]) $(id).oninput = drawTouching;
$("t-canvas").onclick = (e) => {
  const rect = e.target.getBoundingClientRect();
  center = view($("t-canvas"), T_SCALE).toWorld(e.clientX - rect.left, e.clientY - rect.top);
  drawTouching();
};
drawBall();
drawDensity();
drawTouching();
