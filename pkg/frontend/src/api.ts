// Typed client for the read-only coverage API.  The viewer never computes
// coverage itself: every number shown comes from one of these responses.

export interface Meta {
  circuit: string;
  hash: string;
  mode: string;
  model: string;
  tool: string;
  items: number;
}

export interface TestEntry {
  name: string;
  cycles: number;
}

export interface TreeNode {
  path: string;
  total: number;
  covered: number;
  percent: number;
  own_total: number;
  own_covered: number;
  children: TreeNode[];
}

export interface ItemRow {
  item: string;
  gate: string;
  kind: string;
  construct: string;
  loc: string;
  covered: boolean;
}

export interface ItemsResponse {
  path: string;
  count: number;
  items: ItemRow[];
}

async function getJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  const body = await res.json();
  if (!res.ok) {
    const msg = (body && (body as { error?: string }).error) || `${res.status}`;
    throw new Error(`API error: ${msg}`);
  }
  return body as T;
}

export function selectionQuery(tests: string[]): string {
  return encodeURIComponent(tests.join(","));
}

export const api = {
  meta: () => getJson<Meta>("/api/meta"),
  tests: () => getJson<TestEntry[]>("/api/tests"),
  tree: (tests: string[]) =>
    getJson<TreeNode>(`/api/tree?tests=${selectionQuery(tests)}`),
  items: (path: string, tests: string[], covered?: boolean) => {
    let url = `/api/items?path=${encodeURIComponent(path)}&tests=${selectionQuery(tests)}`;
    if (covered !== undefined) url += `&covered=${covered}`;
    return getJson<ItemsResponse>(url);
  },
};
