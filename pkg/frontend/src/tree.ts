/** Provenance tree over the JSON dump of collected rule applications.
 * Children render lazily: a node's subtree appears only once expanded. */

import { DumpRecord } from "./protocol.js";

export interface TreeNode {
  id: string;
  rune: string;
  target: string;
  result: string | null;
  failureReason: string | null;
  children: TreeNode[];
}

function build(records: DumpRecord[], prefix: string): TreeNode[] {
  return records.map((r, i) => ({
    id: prefix ? `${prefix}.${i}` : String(i),
    rune: r.rune,
    target: r.target,
    result: r.result,
    failureReason: r.failure_reason,
    children: build(r.children ?? [], prefix ? `${prefix}.${i}` : String(i)),
  }));
}

export class ProvenanceTree {
  expanded = new Set<string>();
  highlighted = new Set<string>();

  private constructor(public roots: TreeNode[]) {}

  static fromDump(records: DumpRecord[]): ProvenanceTree {
    return new ProvenanceTree(build(records, ""));
  }

  nodeCount(): number {
    const count = (ns: TreeNode[]): number =>
      ns.reduce((acc, n) => acc + 1 + count(n.children), 0);
    return count(this.roots);
  }

  nodeAt(path: number[]): TreeNode | null {
    let nodes = this.roots;
    let node: TreeNode | null = null;
    for (const i of path) {
      node = nodes[i] ?? null;
      if (node === null) return null;
      nodes = node.children;
    }
    return node;
  }

  toggle(id: string): void {
    if (this.expanded.has(id)) this.expanded.delete(id);
    else this.expanded.add(id);
  }

  /** Mark the product path of a query: every node on the path is
   * highlighted and its ancestors expanded so the product is visible. */
  highlight(path: number[]): void {
    this.highlighted.clear();
    const ids: string[] = [];
    let node: TreeNode | null = null;
    let nodes = this.roots;
    for (const i of path) {
      node = nodes[i] ?? null;
      if (node === null) return;
      ids.push(node.id);
      nodes = node.children;
    }
    for (const id of ids) {
      this.highlighted.add(id);
      this.expanded.add(id);
    }
  }

  /** Rows actually visible under lazy rendering. */
  visibleRows(): TreeNode[] {
    const out: TreeNode[] = [];
    const walk = (ns: TreeNode[]) => {
      for (const n of ns) {
        out.push(n);
        if (this.expanded.has(n.id)) walk(n.children);
      }
    };
    walk(this.roots);
    return out;
  }
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function treeHtml(tree: ProvenanceTree | null): string {
  if (tree === null) {
    return `<div class="tree empty">No provenance data loaded.</div>`;
  }
  if (tree.roots.length === 0) {
    return `<div class="tree empty">No rule applications were collected.</div>`;
  }
  const row = (n: TreeNode, depth: number): string => {
    const cls = tree.highlighted.has(n.id) ? "node highlight" : "node";
    const caret = n.children.length
      ? `<span class="caret" data-id="${n.id}">${tree.expanded.has(n.id) ? "▾" : "▸"}</span>`
      : `<span class="caret none"></span>`;
    const failure = n.failureReason
      ? ` <span class="failure">${escapeHtml(n.failureReason)}</span>`
      : "";
    const result = n.result !== null ? escapeHtml(n.result) : "(no result)";
    const kids = tree.expanded.has(n.id)
      ? n.children.map((c) => row(c, depth + 1)).join("")
      : "";
    return (
      `<div class="${cls}" data-id="${n.id}" style="margin-left:${depth}em">` +
      `${caret}<span class="rune">${escapeHtml(n.rune)}</span> ` +
      `<span class="target">${escapeHtml(n.target)}</span> → ` +
      `<span class="result">${result}</span>${failure}</div>` +
      kids
    );
  };
  return `<div class="tree">` + tree.roots.map((n) => row(n, 0)).join("") + `</div>`;
}
