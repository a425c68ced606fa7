import init, { UrbanDemo, round_time, rounds_within } from "./pkg/anaconda_demo.js";

const SCALE = 8;
const $ = (id) => document.getElementById(id);
const canvas = $("map");
const ctx = canvas.getContext("2d");
let demo;
let timer = null;

function draw() {
  const cols = demo.cols(), rows = demo.rows(), cell = demo.cell_size() * SCALE;
  const states = demo.cell_states();
  const colors = ["#f4f4f4", "#5a6270", "#f2c14e"];
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      ctx.fillStyle = colors[states[r * cols + c]];
      ctx.fillRect(c * cell, canvas.height - (r + 1) * cell, cell, cell);
    }
  }
  const cams = demo.cameras();
  for (let i = 0; i < cams.length; i += 5) {
    const [x, y, heading, radius, aov] = cams.slice(i, i + 5);
    const px = x * SCALE, py = canvas.height - y * SCALE;
    ctx.strokeStyle = "#c0392b";
    ctx.beginPath();
    ctx.moveTo(px, py);
    // canvas angles run clockwise, ours counter-clockwise
    ctx.arc(px, py, radius * SCALE, -heading - aov / 2, -heading + aov / 2);
    ctx.closePath();
    ctx.stroke();
    ctx.fillStyle = "#c0392b";
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fill();
  }
  $("round").textContent = demo.rounds();
  $("coverage").textContent = demo.coverage().toFixed(2) + "%";
}

function reset() {
  stop();
  if (demo) demo.free();
  demo = new UrbanDemo(Number($("alpha").value), Number($("seed").value));
  draw();
}

function stop() {
  clearInterval(timer);
  timer = null;
  $("play").textContent = "play";
}

function calculate() {
  const args = [Number($("c-alpha").value), Number($("c-tf").value), Number($("c-tc").value)];
  try {
    $("c-round").textContent = round_time(...args).toFixed(4);
    $("c-rounds").textContent = rounds_within(Number($("c-budget").value), ...args);
  } catch (e) {
    $("c-rounds").textContent = e.message;
  }
}

await init();
reset();
calculate();

$("reset").onclick = reset;
$("step").onclick = () => { demo.step(100); draw(); };
$("play").onclick = () => {
  if (timer) return stop();
  $("play").textContent = "pause";
  timer = setInterval(() => { demo.step(20); draw(); }, 30);
};
canvas.onclick = (ev) => {
  const rect = canvas.getBoundingClientRect();
  const x = (ev.clientX - rect.left) / SCALE, y = (canvas.height - (ev.clientY - rect.top)) / SCALE;
  const cams = demo.cameras();
  let best = -1, bestDist = 3;
  for (let i = 0; i < cams.length; i += 5) {
    const d = Math.hypot(cams[i] - x, cams[i + 1] - y);
    if (d < bestDist) { best = i / 5; bestDist = d; }
  }
  if (best >= 0) { demo.rotate(best); draw(); }
};
for (const id of ["c-alpha", "c-tf", "c-tc", "c-budget"]) $(id).oninput = calculate;
