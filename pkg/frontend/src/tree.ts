// Hierarchy tree: one row per node with covered/total and the percentage
// reported by the API, expandable children, click-to-drill into items.

import { TreeNode } from "./api.js";
import { ViewerState } from "./state.js";

export function fmtPercent(p: number): string {
  return `${p.toFixed(2)}%`;
}

export function nodeLabel(node: TreeNode): string {
  if (node.path === "") return "(root)";
  const parts = node.path.split(".");
  return parts[parts.length - 1];
}

export function renderTree(
  container: HTMLElement,
  root: TreeNode,
  state: ViewerState,
  onSelectPath: (path: string) => void,
  onToggle: (path: string) => void,
): void {
  container.textContent = "";
  container.appendChild(renderNode(root, state, onSelectPath, onToggle, 0));
}

function renderNode(
  node: TreeNode,
  state: ViewerState,
  onSelectPath: (path: string) => void,
  onToggle: (path: string) => void,
  depth: number,
): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "tree-node";

  const row = document.createElement("div");
  row.className = "tree-row";
  row.dataset.path = node.path;
  row.style.paddingLeft = `${depth * 18}px`;
  if (node.path === state.currentPath) row.classList.add("current");

  const toggle = document.createElement("span");
  toggle.className = "tree-toggle";
  const expanded = state.expanded.has(node.path);
  toggle.textContent = node.children.length ? (expanded ? "\u25be" : "\u25b8") : "\u00b7";
  if (node.children.length) {
    toggle.addEventListener("click", (ev) => {
      ev.stopPropagation();
      onToggle(node.path);
    });
  }
  row.appendChild(toggle);

  const name = document.createElement("span");
  name.className = "tree-name";
  name.textContent = nodeLabel(node);
  row.appendChild(name);

  const counts = document.createElement("span");
  counts.className = "tree-counts";
  counts.textContent = `${node.covered}/${node.total}`;
  row.appendChild(counts);

  const bar = document.createElement("span");
  bar.className = "tree-bar";
  const fill = document.createElement("span");
  fill.className = "tree-bar-fill";
  fill.style.width = `${Math.round(node.percent)}%`;
  bar.appendChild(fill);
  row.appendChild(bar);

  const pct = document.createElement("span");
  pct.className = "tree-pct";
  pct.textContent = fmtPercent(node.percent);
  row.appendChild(pct);

  row.addEventListener("click", () => onSelectPath(node.path));
  wrap.appendChild(row);

  if (expanded) {
    for (const child of node.children) {
      wrap.appendChild(renderNode(child, state, onSelectPath, onToggle, depth + 1));
    }
  }
  return wrap;
}
