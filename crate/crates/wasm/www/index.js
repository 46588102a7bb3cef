import init, { Planner, box_overlap } from "./pkg/roadside_wasm.js";

const LIDAR_SPECS = ["lidar_16", "lidar_32", "lidar_64"];
const STATE_COLOR = ["#fff", "#ddd", "#4a90d9", "#e3a33b", "#3bb273"];
const $ = (id) => document.getElementById(id);

let planner = null;
let layout = null;
let picked = { lidar: new Set(), radar: new Set() };

// ---- placement ----------------------------------------------------------

const grid = $("grid");
const g = grid.getContext("2d");

function toCanvas(x, y) {
  const scale = grid.width / (layout.nx * layout.cell_size);
  return [(x - layout.origin[0]) * scale, grid.height - (y - layout.origin[1]) * scale];
}

function mountMarker(m, kind, on) {
  const [cx, cy] = toCanvas(m.x, m.y);
  // candidates share poles; fan them out by type and height so each stays clickable
  const slot = kind === "lidar" ? LIDAR_SPECS.indexOf(m.spec) : LIDAR_SPECS.length;
  const px = cx + (slot - 1.5) * 12, py = cy + (m.z > 5 ? -7 : 7);
  g.beginPath();
  if (kind === "lidar") {
    g.arc(px, py, 5, 0, 2 * Math.PI);
  } else {
    g.moveTo(px, py - 6); g.lineTo(px + 5, py + 4); g.lineTo(px - 5, py + 4); g.closePath();
  }
  g.fillStyle = on ? "#d0021b" : "#fff";
  g.fill();
  g.strokeStyle = "#222";
  g.stroke();
  return [px, py];
}

let hitboxes = [];

function draw() {
  const states = planner.coverage(Uint32Array.from(picked.lidar), Uint32Array.from(picked.radar));
  const px = grid.width / layout.nx;
  g.clearRect(0, 0, grid.width, grid.height);
  for (let j = 0; j < states.length; j++) {
    const row = Math.floor(j / layout.nx), col = j % layout.nx;
    g.fillStyle = STATE_COLOR[states[j]];
    g.fillRect(col * px, grid.height - (row + 1) * px, px, px);
  }
  g.fillStyle = "#555";
  for (const [x0, y0, x1, y1] of layout.occluders) {
    const [ax, ay] = toCanvas(x0, y1), [bx, by] = toCanvas(x1, y0);
    g.fillRect(ax, ay, bx - ax, by - ay);
  }
  hitboxes = [];
  for (const kind of ["lidar", "radar"]) {
    layout[kind].forEach((m, i) => {
      const [x, y] = mountMarker(m, kind, picked[kind].has(i));
      hitboxes.push({ x, y, kind, i });
    });
  }
  const seen = states.filter((s) => s >= 2).length;
  const roi = states.filter((s) => s > 0).length;
  const names = (kind) => [...picked[kind]].sort((a, b) => a - b).map((i) => layout[kind][i].id).join(", ") || "-";
  return { seen, roi, names };
}

function showSelection(extra = "") {
  const { seen, roi, names } = draw();
  $("plan-stats").textContent =
    `lidar: ${names("lidar")}\nradar: ${names("radar")}\n` +
    `covered ${seen}/${roi} ROI cells (${(100 * seen / roi).toFixed(1)}%)` + extra;
}

function rebuild() {
  $("plan-stats").textContent = "building scene...";
  // let the message paint before the ray casting blocks the thread
  setTimeout(() => {
    planner?.free();
    planner = new Planner(Number($("road").value), $("buildings").checked);
    layout = JSON.parse(planner.layout());
    picked = { lidar: new Set(), radar: new Set() };
    showSelection();
  }, 20);
}

function optimize() {
  try {
    const plan = JSON.parse(planner.optimize(Number($("budget").value), Number($("tau").value), $("solver").value));
    picked = { lidar: new Set(plan.lidar), radar: new Set(plan.radar) };
    showSelection(`\nobjective ${plan.objective.toFixed(2)} (${plan.optimal ? "optimal" : "greedy"}), cost ${plan.cost.toFixed(2)}`);
  } catch (e) {
    $("plan-stats").textContent = String(e);
  }
}

grid.addEventListener("click", (ev) => {
  const r = grid.getBoundingClientRect();
  const x = ev.clientX - r.left, y = ev.clientY - r.top;
  const hit = hitboxes.find((h) => Math.hypot(h.x - x, h.y - y) < 7);
  if (!hit) return;
  const set = picked[hit.kind];
  set.has(hit.i) ? set.delete(hit.i) : set.add(hit.i);
  showSelection();
});

$("rebuild").onclick = rebuild;
$("optimize").onclick = optimize;
$("clear").onclick = () => { picked = { lidar: new Set(), radar: new Set() }; showSelection(); };

// ---- IoU explorer -------------------------------------------------------

const iou = $("iou");
const c = iou.getContext("2d");
const BOX_A = [0, 0, 0.75, 4.5, 1.8, 1.5, 0];

function poly(points, fill, stroke) {
  const s = iou.width / 10;
  c.beginPath();
  points.forEach(([x, y], k) => {
    const px = iou.width / 2 + x * s, py = iou.height / 2 - y * s;
    k ? c.lineTo(px, py) : c.moveTo(px, py);
  });
  c.closePath();
  if (fill) { c.fillStyle = fill; c.fill(); }
  if (stroke) { c.strokeStyle = stroke; c.lineWidth = 2; c.stroke(); }
}

function updateIou() {
  const b = [$("bx"), $("by"), $("bz"), $("bl"), $("bw")].map((e) => Number(e.value));
  const boxB = [b[0], b[1], b[2], b[3], b[4], 1.5, Number($("byaw").value)];
  const r = JSON.parse(box_overlap(Float64Array.from(BOX_A), Float64Array.from(boxB)));
  c.clearRect(0, 0, iou.width, iou.height);
  poly(r.a, "rgba(74,144,217,.25)", "#4a90d9");
  poly(r.b, "rgba(227,163,59,.25)", "#e3a33b");
  if (r.overlap.length > 2) poly(r.overlap, "rgba(59,178,115,.6)", "#3bb273");
  $("iou-stats").textContent =
    `3D IoU          ${r.iou.toFixed(4)}\nBEV overlap m²  ${r.bev_intersection.toFixed(3)}\n` +
    `box B z centre  ${boxB[2].toFixed(2)} (A spans 0 to 1.5 m)`;
}

for (const id of ["bx", "by", "bz", "byaw", "bl", "bw"]) $(id).addEventListener("input", updateIou);

await init();
updateIou();
rebuild();
