import init, { simulate, stats, anneal } from "./pkg/shadow_anneal_wasm.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 400;
const TRACE_COLUMNS = 4;

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let coords = [];

function el(name, attrs, parent) {
  const e = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  parent.appendChild(e);
  return e;
}

function report(err) {
  $("status").textContent = err ? String(err.message ?? err) : "";
}

function drawPattern() {
  const svg = $("pattern");
  svg.replaceChildren();
  const r = num("r") * SIZE;
  for (let i = 0; i < coords.length; i += 2) {
    const cx = coords[i] * SIZE;
    const cy = (1 - coords[i + 1]) * SIZE;
    el("circle", { cx, cy, r: r / 2, fill: "#4a7fc133", stroke: "none" }, svg);
    el("circle", { cx, cy, r: 2.5, fill: "#1b3d6e" }, svg);
  }
  try {
    const s = stats(new Float64Array(coords), num("r"));
    $("stats").textContent = `n = ${s[0]}, s_r = ${s[1]}`;
    report(null);
  } catch (e) {
    report(e);
  }
}

// Click near a point to remove it, elsewhere to add one.
$("pattern").addEventListener("click", (ev) => {
  const box = ev.currentTarget.getBoundingClientRect();
  const x = (ev.clientX - box.left) / box.width;
  const y = 1 - (ev.clientY - box.top) / box.height;
  const hit = 6 / SIZE;
  for (let i = 0; i < coords.length; i += 2) {
    if (Math.hypot(coords[i] - x, coords[i + 1] - y) < hit) {
      coords.splice(i, 2);
      drawPattern();
      return;
    }
  }
  coords.push(Math.min(Math.max(x, 0), 1), Math.min(Math.max(y, 0), 1));
  drawPattern();
});

$("simulate").addEventListener("click", () => {
  try {
    coords = Array.from(simulate(num("beta"), num("gamma"), num("r"), num("steps"), num("seed")));
    drawPattern();
  } catch (e) {
    report(e);
  }
});

function drawTrace(rows) {
  const svg = $("trace");
  svg.replaceChildren();
  const panels = [
    { label: "log β", col: 1, lo: 0, hi: 7, top: 10 },
    { label: "log γ", col: 2, lo: -7, hi: 0, top: 165 },
  ];
  const left = 50, width = 460, height = 140;
  const last = rows[rows.length - 1][0];
  for (const p of panels) {
    el("rect", { x: left, y: p.top, width, height, fill: "none", stroke: "#999" }, svg);
    const label = el("text", { x: 4, y: p.top + height / 2, "font-size": 12 }, svg);
    label.textContent = p.label;
    for (const v of [p.lo, p.hi]) {
      const t = el("text", { x: left - 4, y: p.top + (v === p.hi ? 10 : height), "font-size": 10, "text-anchor": "end" }, svg);
      t.textContent = v;
    }
    const pts = rows
      .map((r) => {
        const x = left + (r[0] / last) * width;
        const y = p.top + (1 - (r[p.col] - p.lo) / (p.hi - p.lo)) * height;
        return `${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    el("polyline", { points: pts, fill: "none", stroke: "#c1440e", "stroke-width": 1.2 }, svg);
  }
}

$("anneal").addEventListener("click", () => {
  const s = stats(new Float64Array(coords), num("r"));
  $("result").textContent = "running…";
  // Let the status text paint before the blocking run.
  setTimeout(() => {
    try {
      const flat = anneal(s[0], s[1], num("r"), num("iterations"), num("seed"));
      const rows = [];
      for (let i = 0; i < flat.length; i += TRACE_COLUMNS) rows.push(flat.slice(i, i + TRACE_COLUMNS));
      drawTrace(rows);
      const [, lb, lg, t] = rows[rows.length - 1];
      $("result").textContent =
        `theta = (${lb.toFixed(3)}, ${lg.toFixed(3)}), beta = ${Math.exp(lb).toFixed(1)}, ` +
        `gamma = ${Math.exp(lg).toFixed(3)}, final T = ${t.toExponential(2)}`;
      report(null);
    } catch (e) {
      $("result").textContent = "";
      report(e);
    }
  }, 20);
});

await init();
$("simulate").click();
