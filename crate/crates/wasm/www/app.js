// Demo page logic. Expects the wasm-bindgen bundle in ./pkg (see the
// crate README for the build command).

import init, {
  simulateHeatmap,
  correlationContour,
  trainAndPredict,
} from "./pkg/gridrisk_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function params() {
  return {
    seed: num("seed"),
    days: num("days"),
    rows: num("rows"),
    cols: num("cols"),
    base: num("base"),
    amp: num("amp"),
    decay: num("decay"),
  };
}

// dark blue -> yellow-white ramp
function heatColor(t) {
  const r = Math.round(255 * Math.min(1, 1.8 * t));
  const g = Math.round(255 * Math.pow(t, 1.4));
  const b = Math.round(60 + 120 * (1 - t) * t);
  return `rgb(${r},${g},${b})`;
}

function drawHeatmap(result) {
  const canvas = $("heatmap");
  const ctx = canvas.getContext("2d");
  const { rows, cols } = result;
  const totals = result.totals;
  const max = Math.max(1, ...totals);
  const cw = canvas.width / cols;
  const ch = canvas.height / rows;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      ctx.fillStyle = heatColor(totals[r * cols + c] / max);
      // row 0 is the grid's south edge; draw it at the bottom
      ctx.fillRect(c * cw, (rows - 1 - r) * ch, Math.ceil(cw), Math.ceil(ch));
    }
  }
  $("heatmap-info").textContent =
    `${result.eventCount} events over ${num("days")} days\n` +
    `busiest cell: ${max} events`;
}

function runHeatmap() {
  const p = params();
  try {
    drawHeatmap(simulateHeatmap(p.seed, p.days, p.rows, p.cols, p.base, p.amp, p.decay));
  } catch (e) {
    $("heatmap-info").textContent = `error: ${e}`;
  }
}

function drawContour(result) {
  const canvas = $("contour");
  const ctx = canvas.getContext("2d");
  const K = result.maxK + 1;
  const T = result.maxTau + 1;
  const values = result.values;
  const cw = canvas.width / T;
  const ch = canvas.height / K;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let k = 0; k < K; k++) {
    for (let tau = 0; tau < T; tau++) {
      const v = values[k * T + tau];
      if (Number.isNaN(v)) {
        ctx.fillStyle = "#555";
      } else if (v >= 0) {
        const t = Math.min(1, v);
        ctx.fillStyle = `rgb(${Math.round(40 + 215 * t)},${Math.round(40 * (1 - t))},${Math.round(40 * (1 - t))})`;
      } else {
        const t = Math.min(1, -v);
        ctx.fillStyle = `rgb(${Math.round(40 * (1 - t))},${Math.round(40 * (1 - t))},${Math.round(40 + 215 * t)})`;
      }
      ctx.fillRect(tau * cw, k * ch, Math.ceil(cw), Math.ceil(ch));
    }
  }
  const peaks = result.peakTaus;
  const lines = [];
  for (let k = 1; k < peaks.length; k++) {
    lines.push(`k=${k}: best lag in [12,36] = ${peaks[k] < 0 ? "undefined" : peaks[k] + " h"}`);
  }
  $("contour-info").textContent = lines.join("\n");
}

function runContour() {
  const p = params();
  try {
    drawContour(
      correlationContour(p.seed, p.days, p.rows, p.cols, p.base, p.amp, p.decay, num("maxk"), num("maxtau"))
    );
  } catch (e) {
    $("contour-info").textContent = `error: ${e}`;
  }
}

function drawCurve(result) {
  const canvas = $("curve");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const real = result.real;
  const pred = result.predicted;
  if (real.length === 0) {
    $("train-info").textContent = "no test samples for the hotspot cell";
    return;
  }
  const max = Math.max(...real, ...pred, 1e-9);
  const x = (i) => (i / (real.length - 1 || 1)) * (canvas.width - 10) + 5;
  const y = (v) => canvas.height - 8 - (v / max) * (canvas.height - 20);

  const plot = (series, style, dash) => {
    ctx.strokeStyle = style;
    ctx.setLineDash(dash);
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    series.forEach((v, i) => (i === 0 ? ctx.moveTo(x(i), y(v)) : ctx.lineTo(x(i), y(v))));
    ctx.stroke();
  };
  plot(real, "#ddd", []);
  plot(pred, "#f90", []);
  ctx.setLineDash([]);
  $("train-info").textContent =
    `epochs run: ${result.epochsRun}\n` +
    `test RMSE  model: ${result.rmseModel.toFixed(4)}\n` +
    `test RMSE  yesterday-reference: ${result.rmseHavg.toFixed(4)}\n` +
    `white = real risk, orange = model prediction`;
}

function runTrain() {
  const p = params();
  $("train-info").textContent = "training…";
  // let the browser paint the message before the blocking call
  setTimeout(() => {
    try {
      drawCurve(
        trainAndPredict(
          p.seed, p.days, p.rows, p.cols, p.base, p.amp, p.decay,
          num("wdays"), num("seqlen"), num("epochs")
        )
      );
    } catch (e) {
      $("train-info").textContent = `error: ${e}`;
    }
  }, 30);
}

await init();
$("run-heatmap").addEventListener("click", runHeatmap);
$("run-contour").addEventListener("click", runContour);
$("run-train").addEventListener("click", runTrain);
runHeatmap();
runContour();
