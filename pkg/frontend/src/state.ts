// Selection state shared by the panels.  Every async render is keyed by
// the version current when the fetch started; stale responses are dropped
// (last write wins).

export interface ViewerState {
  selected: Set<string>;
  version: number;
  expanded: Set<string>;
  currentPath: string;
  coveredFilter: boolean | undefined; // undefined = all items
  page: number;
  pageSize: number;
}

export function initialState(): ViewerState {
  return {
    selected: new Set(),
    version: 0,
    expanded: new Set([""]),
    currentPath: "",
    coveredFilter: false,
    page: 0,
    pageSize: 25,
  };
}

export function bumpSelection(state: ViewerState, name: string, on: boolean): number {
  if (on) state.selected.add(name);
  else state.selected.delete(name);
  state.page = 0;
  state.version += 1;
  return state.version;
}

export function setSelection(state: ViewerState, names: string[]): number {
  state.selected = new Set(names);
  state.page = 0;
  state.version += 1;
  return state.version;
}

export function selectedList(state: ViewerState): string[] {
  return Array.from(state.selected).sort();
}

export function clampPage(state: ViewerState, itemCount: number): number {
  const pages = Math.max(1, Math.ceil(itemCount / state.pageSize));
  if (state.page >= pages) state.page = pages - 1;
  if (state.page < 0) state.page = 0;
  return pages;
}
