import init, { evolve_elementary, extract_neuron, roundtrip_term } from "./pkg/mvca_web.js";

const $ = (id) => document.getElementById(id);

function show(id, f) {
  const out = $(id);
  try {
    out.textContent = f();
    out.className = "";
  } catch (e) {
    out.textContent = e.message ?? String(e);
    out.className = "err";
  }
}

await init();

$("run-evolve").onclick = () =>
  show("out-evolve", () =>
    evolve_elementary(+$("rule").value, $("init").value, +$("steps").value, $("periodic").checked)
      .replaceAll("0", "·")
      .replaceAll("1", "█"));

$("run-neuron").onclick = () =>
  show("out-neuron", () => extract_neuron($("weights").value, $("bias").value, +$("k-neuron").value));

$("run-term").onclick = () =>
  show("out-term", () => roundtrip_term($("term").value, +$("k-term").value));

$("run-evolve").click();
