import init, { formula_info, compare_texts, rank_demo } from "./pkg/chemvis_web.js";

const $ = (id) => document.getElementById(id);

function escape(text) {
  const span = document.createElement("span");
  span.textContent = text == null ? "" : String(text);
  return span.innerHTML;
}

function table(headers, rows, rowClass = () => "") {
  const head = headers.map((h) => `<th>${escape(h)}</th>`).join("");
  const body = rows
    .map((cells, i) => `<tr class="${rowClass(i)}">${cells.map((c) => `<td>${escape(c)}</td>`).join("")}</tr>`)
    .join("");
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

function fail(target, result) {
  target.innerHTML = `<p class="error">${escape(result.error)}</p>`;
}

function showFormula() {
  const out = $("formula-out");
  const r = JSON.parse(formula_info($("formula").value));
  if (r.error) return fail(out, r);
  const known = r.known.length
    ? r.known.map((k) => `${k.name} (CID ${k.cid})`).join(", ")
    : "not in the bundled lexicon";
  out.innerHTML =
    `<p>Hill: <b>${escape(r.subscript)}</b> &middot; ${r.weight.toFixed(3)} g/mol &middot; ${escape(known)}</p>` +
    table(["element", "count", "mass"], r.elements.map((e) => [e.element, e.count, e.mass]));
}

function showCompare() {
  const out = $("compare-out");
  const r = JSON.parse(compare_texts($("left").value, $("right").value));
  if (r.error) return fail(out, r);
  const rows = r.rows.map((row) => [
    row.entity.cid ?? "",
    row.entity.display_name,
    row.entity.formula ?? "",
    row.entity.weight ?? "",
    row.freq_input,
    row.freq_candidate,
  ]);
  out.innerHTML =
    `<p>Entity cosine: ${r.entity_similarity.toFixed(4)}</p>` +
    table(["CID", "Name", "Formula", "Weight", "left", "right"], rows, (i) => `shade-${r.rows[i].shade}`);
}

function showRank() {
  const out = $("rank-out");
  const we = Number($("w-entity").value);
  const wt = Number($("w-text").value);
  const r = JSON.parse(rank_demo($("query").value, we, wt));
  if (r.error) return fail(out, r);
  $("weights").textContent = `normalized: entity ${r.weights.entity.toFixed(2)}, text ${r.weights.text.toFixed(2)}`;
  out.innerHTML = table(
    ["#", "title", "score", "entity", "text"],
    r.recommendations.map((x, i) => [
      i + 1,
      x.title,
      x.score.toFixed(4),
      x.entity_component.toFixed(4),
      x.text_component.toFixed(4),
    ]),
  );
}

await init();
$("formula").addEventListener("input", showFormula);
for (const id of ["left", "right"]) $(id).addEventListener("input", showCompare);
for (const id of ["query", "w-entity", "w-text"]) $(id).addEventListener("input", showRank);
showFormula();
showCompare();
showRank();
