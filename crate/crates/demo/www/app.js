import init, { wbc_demo, concept_demo, curve_demo } from "./pkg/relex_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const esc = (s) => String(s).replace(/[&<>]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;" })[c]);
const fmt = (x) => (x == null ? "n/a" : x.toFixed(3));

function guarded(out, fn) {
  try {
    fn();
  } catch (e) {
    $(out).innerHTML = `<p class="error">${esc(e)}</p>`;
  }
}

function showWbc() {
  guarded("wbc-out", () => {
    const r = JSON.parse(wbc_demo(num("wbc-seed"), num("wbc-docs"), num("wbc-rho")));
    const rows = Object.entries(r.relations)
      .map(([name, c]) => `<tr><td>${esc(name)}</td><td>${c.tp}</td><td>${c.fp}</td><td>${c.fn}</td><td>${fmt(c.precision)}</td><td>${fmt(c.recall)}</td><td>${fmt(c.f1)}</td></tr>`)
      .join("");
    const o = r.overall;
    const pairs = (list) => list.map((p) => `<span class="chip">${esc(p.relation)}: ${esc(p.left)} &rarr; ${esc(p.right)}</span>`).join(" ") || "none";
    $("wbc-out").innerHTML = `
      <table><tr><th>relation</th><th>TP</th><th>FP</th><th>FN</th><th>P</th><th>R</th><th>F1</th></tr>${rows}
      <tr><th>micro</th><th>${o.tp}</th><th>${o.fp}</th><th>${o.fn}</th><th>${fmt(o.precision)}</th><th>${fmt(o.recall)}</th><th>${fmt(o.f1)}</th></tr></table>
      <h3>${esc(r.sample.id)}</h3><pre>${esc(r.sample.text)}</pre>
      <p><b>predicted</b> ${pairs(r.sample.predicted)}</p><p><b>gold</b> ${pairs(r.sample.gold)}</p>`;
  });
}

function showConcepts() {
  guarded("con-out", () => {
    const r = JSON.parse(concept_demo(num("con-seed"), num("con-mu")));
    const clusters = r.clusters.map((c) => `<li>${c.map(esc).join(", ")}</li>`).join("");
    $("con-out").innerHTML = `<p>${r.mapped} of ${r.vocabulary} lemmas fall into ${r.concepts} concepts. Concepts with more than one member:</p><ul>${clusters}</ul>`;
  });
}

function showCurve() {
  $("cur-out").textContent = "training...";
  setTimeout(() => guarded("cur-out", () => {
    const r = JSON.parse(curve_demo(num("cur-seed"), num("cur-docs")));
    const w = 520, h = 260, pad = 36;
    const x = (f) => pad + ((f - 0.1) / 0.8) * (w - 2 * pad);
    const y = (v) => h - pad - v * (h - 2 * pad);
    const colours = { BoW: "#c55", BoC: "#36c" };
    let svg = `<svg width="${w}" height="${h}">`;
    svg += `<line x1="${pad}" y1="${y(0)}" x2="${w - pad}" y2="${y(0)}" stroke="#999"/><line x1="${pad}" y1="${y(0)}" x2="${pad}" y2="${y(1)}" stroke="#999"/>`;
    for (const t of [0, 0.5, 1]) svg += `<text x="4" y="${y(t) + 4}" font-size="11">${t}</text>`;
    for (const f of [0.1, 0.5, 0.9]) svg += `<text x="${x(f) - 8}" y="${h - 12}" font-size="11">${Math.round(f * 100)}%</text>`;
    for (const [kind, colour] of Object.entries(colours)) {
      const pts = r.points.filter((p) => p.feature_kind === kind && p.f1 != null);
      svg += `<polyline fill="none" stroke="${colour}" stroke-width="2" points="${pts.map((p) => `${x(p.fraction)},${y(p.f1)}`).join(" ")}"/>`;
      svg += `<text x="${w - pad - 30}" y="${kind === "BoW" ? 20 : 36}" fill="${colour}" font-size="12">${kind}</text>`;
    }
    svg += "</svg>";
    $("cur-out").innerHTML = `<p>${esc(r.relation)}, linear SVM, F1 on the held-out test set by training fraction.</p>${svg}`;
  }), 10);
}

await init();
$("wbc-rho").addEventListener("input", () => { $("wbc-rho-val").textContent = $("wbc-rho").value; showWbc(); });
$("con-mu").addEventListener("input", () => { $("con-mu-val").textContent = Number($("con-mu").value).toFixed(2); });
$("wbc-run").addEventListener("click", showWbc);
$("con-run").addEventListener("click", showConcepts);
$("cur-run").addEventListener("click", showCurve);
showWbc();
showConcepts();
