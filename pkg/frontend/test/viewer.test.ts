// Headless API-replay: fetch is mocked with responses recorded from the
// real backend, the viewer renders into jsdom, and every displayed number
// is checked against both the API fixtures and the CLI report text.

// @vitest-environment jsdom

import { beforeEach, describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { mount, Viewer } from "../src/main.js";
import { TreeNode, ItemsResponse } from "../src/api.js";
import { fmtPercent } from "../src/tree.js";
import { setSelection } from "../src/state.js";

const here = dirname(fileURLToPath(import.meta.url));
const fx = JSON.parse(readFileSync(join(here, "fixtures", "loopper.json"), "utf8"));

interface SelectionFixture {
  tests: string[];
  tree: TreeNode;
  cli_report: string;
  items_uncovered: Record<string, ItemsResponse>;
  items_all: Record<string, ItemsResponse>;
}

function fixtureFor(tests: string[]): SelectionFixture {
  const key = tests.slice().sort().join(",");
  const hit = (fx.selections as SelectionFixture[]).find(
    (s) => s.tests.slice().sort().join(",") === key,
  );
  if (!hit) throw new Error(`no fixture for selection '${key}'`);
  return hit;
}

function jsonResponse(obj: unknown): Response {
  return {
    ok: true,
    status: 200,
    json: async () => obj,
  } as unknown as Response;
}

function installFetch(): void {
  globalThis.fetch = (async (input: RequestInfo | URL) => {
    const url = new URL(String(input), "http://viewer.test");
    const tests = (url.searchParams.get("tests") ?? "").split(",").filter(Boolean);
    if (url.pathname === "/api/meta") return jsonResponse(fx.meta);
    if (url.pathname === "/api/tests") return jsonResponse(fx.tests);
    if (url.pathname === "/api/tree") return jsonResponse(fixtureFor(tests).tree);
    if (url.pathname === "/api/items") {
      const path = url.searchParams.get("path") ?? "";
      const covered = url.searchParams.get("covered");
      const sel = fixtureFor(tests);
      const table = covered === "false" ? sel.items_uncovered : sel.items_all;
      if (!(path in table)) throw new Error(`no items fixture for '${path}'`);
      return jsonResponse(table[path]);
    }
    throw new Error(`unexpected fetch ${url.pathname}`);
  }) as typeof fetch;
}

function skeleton(): void {
  document.body.innerHTML = `
    <div id="meta"></div><div id="error"></div>
    <div id="tests"></div><div id="tree"></div><div id="items"></div>`;
}

function allPaths(node: TreeNode, acc: string[] = []): string[] {
  acc.push(node.path);
  node.children.forEach((c) => allPaths(c, acc));
  return acc;
}

/** Parse the CLI hierarchy report into path -> {covered, total, pct}. */
function parseCliReport(text: string): Map<string, { covered: number; total: number; pct: string }> {
  const out = new Map<string, { covered: number; total: number; pct: string }>();
  const stack: string[] = [];
  for (const line of text.trimEnd().split("\n")) {
    const m = /^(\s*)(\S+) (\d+)\/(\d+) ([\d.]+%)$/.exec(line);
    if (!m) throw new Error(`bad report line: ${line}`);
    const depth = m[1].length / 2;
    const name = m[2] === "(root)" ? "" : m[2];
    stack.length = depth;
    stack[depth] = name;
    const path = stack.filter((s) => s !== "").join(".");
    out.set(path, { covered: Number(m[3]), total: Number(m[4]), pct: m[5] });
  }
  return out;
}

async function makeViewer(): Promise<Viewer> {
  skeleton();
  installFetch();
  const viewer = mount(document);
  await viewer.init();
  return viewer;
}

async function applySelection(viewer: Viewer, tests: string[]): Promise<void> {
  setSelection(viewer.state, tests);
  viewer.state.expanded = new Set(allPaths(fixtureFor(tests).tree));
  viewer.state.pageSize = 10000; // compare full lists; pagination tested separately
  await viewer.refresh();
}

function renderedTreeRows(): Map<string, { counts: string; pct: string }> {
  const rows = new Map<string, { counts: string; pct: string }>();
  document.querySelectorAll<HTMLElement>(".tree-row").forEach((row) => {
    rows.set(row.dataset.path ?? "", {
      counts: row.querySelector(".tree-counts")!.textContent!,
      pct: row.querySelector(".tree-pct")!.textContent!,
    });
  });
  return rows;
}

const SELECTIONS: string[][] = [[], ["go_full"], ["go_full", "po_full"]];

describe("viewer fidelity against recorded API and CLI report", () => {
  beforeEach(() => {
    skeleton();
  });

  for (const tests of SELECTIONS) {
    const label = tests.join("+") || "(none)";
    it(`selection ${label}: every rendered percentage equals the CLI report`, async () => {
      const viewer = await makeViewer();
      await applySelection(viewer, tests);
      const fixture = fixtureFor(tests);
      const cli = parseCliReport(fixture.cli_report);
      const rows = renderedTreeRows();
      expect(rows.size).toBe(cli.size);
      for (const [path, want] of cli) {
        const got = rows.get(path);
        expect(got, `missing row for '${path}'`).toBeDefined();
        expect(got!.counts).toBe(`${want.covered}/${want.total}`);
        expect(got!.pct).toBe(want.pct);
      }
    });

    it(`selection ${label}: rendered percentages equal the API tree`, async () => {
      const viewer = await makeViewer();
      await applySelection(viewer, tests);
      const rows = renderedTreeRows();
      const walk = (n: TreeNode): void => {
        const got = rows.get(n.path);
        expect(got).toBeDefined();
        expect(got!.pct).toBe(fmtPercent(n.percent));
        expect(got!.counts).toBe(`${n.covered}/${n.total}`);
        n.children.forEach(walk);
      };
      walk(fixtureFor(tests).tree);
    });

    it(`selection ${label}: uncovered item lists equal the API responses`, async () => {
      const viewer = await makeViewer();
      for (const path of ["per.scr", "per.stat", "per.rxmux"]) {
        viewer.state.currentPath = path;
        viewer.state.coveredFilter = false;
        await applySelection(viewer, tests);
        const want = fixtureFor(tests).items_uncovered[path];
        const cells = Array.from(
          document.querySelectorAll<HTMLElement>(".items-table tr.uncovered td:first-child"),
        ).map((td) => td.textContent);
        expect(cells).toEqual(want.items.map((r) => r.item));
        const head = document.querySelector(".items-head")!.textContent!;
        expect(head).toContain(`${want.count} uncovered`);
      }
    });
  }

  it("toggling one test updates exactly the affected subtree percentages", async () => {
    const viewer = await makeViewer();
    await applySelection(viewer, ["go_full"]);
    const before = renderedTreeRows();
    // simulate the user checking po_full via the checkbox
    const cb = document.querySelector<HTMLInputElement>('input[data-test="po_full"]')!;
    cb.checked = true;
    cb.dispatchEvent(new Event("change"));
    await new Promise((r) => setTimeout(r, 0));
    viewer.state.expanded = new Set(allPaths(fixtureFor(["go_full", "po_full"]).tree));
    await viewer.refresh();
    const after = renderedTreeRows();
    const want = fixtureFor(["go_full", "po_full"]).tree;
    const check = (n: TreeNode): void => {
      expect(after.get(n.path)!.pct).toBe(fmtPercent(n.percent));
      n.children.forEach(check);
    };
    check(want);
    expect(before.get("per.buf")!.pct).not.toBe(after.get("per.buf")!.pct);
  });

  it("empty selection renders all nodes at 0%", async () => {
    const viewer = await makeViewer();
    await applySelection(viewer, []);
    for (const [, row] of renderedTreeRows()) {
      expect(row.pct).toBe("0.00%");
    }
  });

  it("fully covered node shows an empty uncovered table", async () => {
    const viewer = await makeViewer();
    viewer.state.currentPath = "per.rxmux";
    viewer.state.coveredFilter = false;
    await applySelection(viewer, ["go_full", "po_full"]);
    const fixture = fixtureFor(["go_full", "po_full"]);
    // the corpus po set covers every coverable rxmux item; table shows the
    // remaining inherently uncoverable ones, consistent with the API
    const want = fixture.items_uncovered["per.rxmux"];
    const rows = document.querySelectorAll(".items-table tr.uncovered");
    expect(rows.length).toBe(want.count);
    if (want.count === 0) {
      expect(document.querySelector(".items-empty")).not.toBeNull();
    }
  });

  it("pagination clamps at the last page", async () => {
    const viewer = await makeViewer();
    viewer.state.currentPath = "per.scr";
    viewer.state.coveredFilter = false;
    setSelection(viewer.state, []);
    viewer.state.pageSize = 10;
    viewer.state.page = 999; // far beyond the end
    await viewer.refresh();
    const want = fixtureFor([]).items_uncovered["per.scr"];
    const pages = Math.max(1, Math.ceil(want.count / 10));
    expect(viewer.state.page).toBe(pages - 1);
    const label = document.querySelector(".items-nav span")!.textContent;
    expect(label).toBe(`page ${pages}/${pages}`);
    const next = Array.from(document.querySelectorAll<HTMLButtonElement>(".items-nav button"))
      .find((b) => b.textContent === "next")!;
    expect(next.disabled).toBe(true);
  });

  it("API errors raise the banner", async () => {
    skeleton();
    globalThis.fetch = (async () => {
      return { ok: false, status: 400, json: async () => ({ error: "unknown test 'zz'" }) } as unknown as Response;
    }) as typeof fetch;
    const viewer = mount(document);
    await viewer.init();
    const banner = document.getElementById("error")!;
    expect(banner.classList.contains("visible")).toBe(true);
    expect(banner.textContent).toContain("unknown test");
  });
});
