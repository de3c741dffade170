import init, { Demo, sdf_slice, manifold_samples } from "./pkg/mpf_web.js";

const NAMES = ["CPF", "MPF-Uniform", "MPF-Particle", "MPF-Ball"];
const COLORS = ["#d95f02", "#7570b3", "#1b9e77", "#e7298a"];

const workspace = document.getElementById("workspace").getContext("2d");
const joints = document.getElementById("joints").getContext("2d");
const seedInput = document.getElementById("seed");
const filterSelect = document.getElementById("filter");
const status = document.getElementById("status");
const errors = document.getElementById("errors");
const playButton = document.getElementById("play");

let demo;
let field;
let manifold;
let timer = null;

function fieldImage(slice) {
  const [nx, ny, minX, minY, maxX, maxY] = slice.slice(0, 6);
  const values = slice.subarray(6);
  const scale = Math.max(...values.map(Math.abs));
  const canvas = document.createElement("canvas");
  canvas.width = nx;
  canvas.height = ny;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(nx, ny);
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) {
      const d = values[j * nx + i];
      // row 0 is the lowest y, image row 0 is the top
      const p = 4 * ((ny - 1 - j) * nx + i);
      if (d < 0) {
        img.data.set([40, 40, 40, 255], p);
      } else {
        const t = Math.sqrt(d / scale);
        img.data.set([255 - 120 * t, 255 - 80 * t, 255, 255], p);
      }
    }
  }
  ctx.putImageData(img, 0, 0);
  return { canvas, minX, minY, maxX, maxY };
}

function toPixel(x, y) {
  const w = workspace.canvas.width;
  const h = workspace.canvas.height;
  return [((x - field.minX) / (field.maxX - field.minX)) * w, (1 - (y - field.minY) / (field.maxY - field.minY)) * h];
}

function drawArm(q, style, width) {
  const elbow = [Math.cos(q[0]), Math.sin(q[0])];
  const tip = [elbow[0] + Math.cos(q[0] + q[1]), elbow[1] + Math.sin(q[0] + q[1])];
  workspace.strokeStyle = style;
  workspace.lineWidth = width;
  workspace.beginPath();
  workspace.moveTo(...toPixel(0, 0));
  workspace.lineTo(...toPixel(...elbow));
  workspace.lineTo(...toPixel(...tip));
  workspace.stroke();
}

function jointPixel(q) {
  const w = joints.canvas.width;
  const h = joints.canvas.height;
  return [((q[0] + Math.PI) / (2 * Math.PI)) * w, (1 - (q[1] + Math.PI) / (2 * Math.PI)) * h];
}

function cross(ctx, [x, y], style) {
  ctx.strokeStyle = style;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(x - 6, y);
  ctx.lineTo(x + 6, y);
  ctx.moveTo(x, y - 6);
  ctx.lineTo(x, y + 6);
  ctx.stroke();
}

function draw() {
  const index = Number(filterSelect.value);
  const particles = demo.particles(index);
  const maxWeight = Math.max(...particles.filter((_, i) => i % 3 === 2));

  workspace.imageSmoothingEnabled = false;
  workspace.drawImage(field.canvas, 0, 0, workspace.canvas.width, workspace.canvas.height);
  for (let i = 0; i < particles.length; i += 12) {
    const alpha = 0.1 + 0.5 * (particles[i + 2] / maxWeight);
    drawArm([particles[i], particles[i + 1]], hexAlpha(COLORS[index], alpha), 1);
  }
  drawArm(demo.truth(), demo.in_contact() ? "#c00" : "#000", 3);

  joints.fillStyle = "#fff";
  joints.fillRect(0, 0, joints.canvas.width, joints.canvas.height);
  joints.fillStyle = "#999";
  for (let i = 0; i < manifold.length; i += 2) {
    const [x, y] = jointPixel([manifold[i], manifold[i + 1]]);
    joints.fillRect(x - 1, y - 1, 2, 2);
  }
  for (let i = 0; i < particles.length; i += 3) {
    const [x, y] = jointPixel([particles[i], particles[i + 1]]);
    joints.fillStyle = hexAlpha(COLORS[index], 0.15 + 0.85 * (particles[i + 2] / maxWeight));
    joints.beginPath();
    joints.arc(x, y, 2.5, 0, 2 * Math.PI);
    joints.fill();
  }
  cross(joints, jointPixel(demo.encoder()), "#888");
  cross(joints, jointPixel(demo.truth()), "#000");

  const w = demo.wrmse();
  errors.innerHTML = NAMES.map(
    (n, i) => `<tr><td><span class="swatch" style="background:${COLORS[i]}"></span>${n}</td><td>${w[i].toFixed(3)}</td></tr>`,
  ).join("");
  status.textContent = `step ${demo.step_index()} of ${demo.steps()}${demo.in_contact() ? ", in contact" : ""}`;
}

function hexAlpha(hex, alpha) {
  const n = parseInt(hex.slice(1), 16);
  return `rgba(${n >> 16}, ${(n >> 8) & 255}, ${n & 255}, ${alpha.toFixed(3)})`;
}

function stop() {
  clearInterval(timer);
  timer = null;
  playButton.textContent = "Play";
}

function reset() {
  stop();
  demo?.free();
  demo = new Demo(BigInt(Math.max(0, Number(seedInput.value) | 0)));
  draw();
}

function step() {
  if (!demo.advance()) {
    stop();
    return;
  }
  draw();
}

await init();
field = fieldImage(sdf_slice());
manifold = manifold_samples(300, 7n);
reset();

document.getElementById("reset").addEventListener("click", reset);
document.getElementById("step").addEventListener("click", step);
filterSelect.addEventListener("change", draw);
playButton.addEventListener("click", () => {
  if (timer) {
    stop();
  } else {
    timer = setInterval(step, 100);
    playButton.textContent = "Pause";
  }
});
