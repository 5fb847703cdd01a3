// Viewer wiring: test selection drives tree + item refetches; responses
// apply only if the selection version is still current.

import { api, Meta, TestEntry } from "./api.js";
import { ViewerState, initialState, bumpSelection, setSelection, selectedList } from "./state.js";
import { renderTree } from "./tree.js";
import { renderItems } from "./items.js";

export interface ViewerDom {
  meta: HTMLElement;
  tests: HTMLElement;
  tree: HTMLElement;
  items: HTMLElement;
  error: HTMLElement;
}

export class Viewer {
  state: ViewerState = initialState();
  dom: ViewerDom;
  testList: TestEntry[] = [];

  constructor(dom: ViewerDom) {
    this.dom = dom;
  }

  async init(): Promise<void> {
    try {
      const meta = await api.meta();
      this.renderMeta(meta);
      this.testList = await api.tests();
      this.renderTestList();
      await this.refresh();
    } catch (e) {
      this.showError(e);
    }
  }

  showError(e: unknown): void {
    this.dom.error.textContent = e instanceof Error ? e.message : String(e);
    this.dom.error.classList.add("visible");
  }

  clearError(): void {
    this.dom.error.textContent = "";
    this.dom.error.classList.remove("visible");
  }

  renderMeta(meta: Meta): void {
    this.dom.meta.textContent =
      `${meta.circuit} :: ${meta.mode}/${meta.model} universe, ` +
      `${meta.items} items, db ${meta.hash}`;
  }

  renderTestList(): void {
    const box = this.dom.tests;
    box.textContent = "";
    const all = document.createElement("button");
    all.textContent = "all";
    all.addEventListener("click", () => {
      setSelection(this.state, this.testList.map((t) => t.name));
      this.renderTestList();
      void this.refresh();
    });
    const none = document.createElement("button");
    none.textContent = "none";
    none.addEventListener("click", () => {
      setSelection(this.state, []);
      this.renderTestList();
      void this.refresh();
    });
    const bar = document.createElement("div");
    bar.className = "tests-buttons";
    bar.append(all, none);
    box.appendChild(bar);

    for (const t of this.testList) {
      const row = document.createElement("label");
      row.className = "test-row";
      const cb = document.createElement("input");
      cb.type = "checkbox";
      cb.checked = this.state.selected.has(t.name);
      cb.dataset.test = t.name;
      cb.addEventListener("change", () => {
        bumpSelection(this.state, t.name, cb.checked);
        void this.refresh();
      });
      const text = document.createElement("span");
      text.textContent = `${t.name} (${t.cycles} cycles)`;
      row.append(cb, text);
      box.appendChild(row);
    }
  }

  async refresh(): Promise<void> {
    const version = this.state.version;
    const tests = selectedList(this.state);
    this.clearError();
    try {
      const [tree, items] = await Promise.all([
        api.tree(tests),
        api.items(this.state.currentPath, tests, this.state.coveredFilter),
      ]);
      if (version !== this.state.version) return; // stale response
      renderTree(this.dom.tree, tree, this.state,
        (path) => {
          this.state.currentPath = path;
          this.state.page = 0;
          void this.refresh();
        },
        (path) => {
          if (this.state.expanded.has(path)) this.state.expanded.delete(path);
          else this.state.expanded.add(path);
          void this.refresh();
        });
      renderItems(this.dom.items, items, this.state, (delta) => {
        this.state.page += delta;
        void this.refresh();
      });
    } catch (e) {
      if (version === this.state.version) this.showError(e);
    }
  }
}

export function mount(doc: Document): Viewer {
  const need = (id: string): HTMLElement => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  const viewer = new Viewer({
    meta: need("meta"),
    tests: need("tests"),
    tree: need("tree"),
    items: need("items"),
    error: need("error"),
  });
  return viewer;
}

declare global {
  interface Window {
    __viewer?: Viewer;
  }
}

if (typeof document !== "undefined" && document.getElementById("tree")) {
  const viewer = mount(document);
  window.__viewer = viewer;
  void viewer.init();
}
