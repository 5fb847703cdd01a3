// Item drill-down: canonical fault strings for the selected subtree with
// gate kind and language-construct labels, paginated client-side.

import { ItemsResponse } from "./api.js";
import { ViewerState, clampPage } from "./state.js";

export function renderItems(
  container: HTMLElement,
  res: ItemsResponse,
  state: ViewerState,
  onPage: (delta: number) => void,
): void {
  container.textContent = "";

  const head = document.createElement("div");
  head.className = "items-head";
  const what = state.coveredFilter === false ? "uncovered" :
    state.coveredFilter === true ? "covered" : "all";
  head.textContent = `${res.count} ${what} items under "${res.path || "(root)"}"`;
  container.appendChild(head);

  if (res.count === 0) {
    const empty = document.createElement("div");
    empty.className = "items-empty";
    empty.textContent = "nothing here: every item in this subtree is accounted for";
    container.appendChild(empty);
    return;
  }

  const pages = clampPage(state, res.count);
  const start = state.page * state.pageSize;
  const rows = res.items.slice(start, start + state.pageSize);

  const table = document.createElement("table");
  table.className = "items-table";
  const thead = document.createElement("tr");
  for (const h of ["item", "kind", "construct", "loc"]) {
    const th = document.createElement("th");
    th.textContent = h;
    thead.appendChild(th);
  }
  table.appendChild(thead);
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.className = row.covered ? "covered" : "uncovered";
    for (const v of [row.item, row.kind, row.construct, row.loc]) {
      const td = document.createElement("td");
      td.textContent = v;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  container.appendChild(table);

  const nav = document.createElement("div");
  nav.className = "items-nav";
  const prev = document.createElement("button");
  prev.textContent = "prev";
  prev.disabled = state.page === 0;
  prev.addEventListener("click", () => onPage(-1));
  const label = document.createElement("span");
  label.textContent = `page ${state.page + 1}/${pages}`;
  const next = document.createElement("button");
  next.textContent = "next";
  next.disabled = state.page >= pages - 1;
  next.addEventListener("click", () => onPage(1));
  nav.append(prev, label, next);
  container.appendChild(nav);
}
