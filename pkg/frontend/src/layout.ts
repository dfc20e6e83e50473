/**
 * Deterministic diagram layout for a domain model.
 *
 * Aggregates become containers laid out left to right in model order, with
 * their members stacked vertically inside.  Cross-aggregate identifier
 * references (a field typed as another aggregate's root id) become dashed
 * edges between containers.  No randomness, no physics: the same model JSON
 * always produces the same coordinates, which keeps snapshot tests honest.
 */

import type { AggregateJson, ModelJson } from "./api.js";

export interface NodeBox {
  /** Qualified name, e.g. "Order.OrderLine" or "PricingService". */
  qname: string;
  kind: "entity" | "valueobject" | "event" | "repository" | "service";
  isRoot: boolean;
  x: number;
  y: number;
  width: number;
  height: number;
  label: string;
  /** Field and method lines shown inside the box. */
  lines: string[];
}

export interface ContainerBox {
  name: string;
  x: number;
  y: number;
  width: number;
  height: number;
  nodes: NodeBox[];
}

export interface Edge {
  from: string;
  to: string;
  kind: "id-reference" | "repository-for";
  dashed: boolean;
}

export interface Layout {
  width: number;
  height: number;
  containers: ContainerBox[];
  /** Standalone nodes outside any aggregate (shared VOs, repos, services). */
  nodes: NodeBox[];
  edges: Edge[];
}

const NODE_WIDTH = 220;
const LINE_HEIGHT = 16;
const HEADER_HEIGHT = 24;
const NODE_GAP = 16;
const CONTAINER_PAD = 16;
const CONTAINER_GAP = 40;
const MARGIN = 20;

function nodeHeight(lineCount: number): number {
  return HEADER_HEIGHT + lineCount * LINE_HEIGHT + 8;
}

function entityLines(fields: { name: string; type: string }[], methods: { name: string }[]): string[] {
  const lines = fields.map((f) => `${f.name}: ${f.type}`);
  for (const m of methods) {
    lines.push(`${m.name}()`);
  }
  return lines;
}

function layoutAggregate(agg: AggregateJson, x: number, y: number): ContainerBox {
  const nodes: NodeBox[] = [];
  let cursor = y + HEADER_HEIGHT + CONTAINER_PAD;

  const place = (node: Omit<NodeBox, "x" | "y" | "width" | "height">, lineCount: number) => {
    const h = nodeHeight(lineCount);
    nodes.push({ ...node, x: x + CONTAINER_PAD, y: cursor, width: NODE_WIDTH, height: h });
    cursor += h + NODE_GAP;
  };

  for (const entity of agg.entities) {
    const lines = [`id: ${entity.idType}`, ...entityLines(entity.fields, entity.methods)];
    place(
      {
        qname: `${agg.name}.${entity.name}`,
        kind: "entity",
        isRoot: entity.isRoot,
        label: entity.name,
        lines,
      },
      lines.length
    );
  }
  for (const vo of agg.valueObjects) {
    const lines = entityLines(vo.fields, vo.methods);
    place(
      {
        qname: `${agg.name}.${vo.name}`,
        kind: "valueobject",
        isRoot: false,
        label: vo.name,
        lines,
      },
      lines.length
    );
  }
  for (const event of agg.events) {
    const lines = entityLines(event.fields, []);
    place(
      {
        qname: `${agg.name}.${event.name}`,
        kind: "event",
        isRoot: false,
        label: event.name,
        lines,
      },
      lines.length
    );
  }

  return {
    name: agg.name,
    x,
    y,
    width: NODE_WIDTH + 2 * CONTAINER_PAD,
    height: cursor - y - NODE_GAP + CONTAINER_PAD,
    nodes,
  };
}

/** Map each aggregate's root id type back to the aggregate that owns it. */
function rootIdIndex(model: ModelJson): Map<string, string> {
  const index = new Map<string, string>();
  for (const agg of model.aggregates) {
    for (const entity of agg.entities) {
      if (entity.isRoot) {
        index.set(entity.idType, agg.name);
      }
    }
  }
  return index;
}

export function computeLayout(model: ModelJson): Layout {
  const containers: ContainerBox[] = [];
  let x = MARGIN;
  let maxBottom = 0;

  for (const agg of model.aggregates) {
    const box = layoutAggregate(agg, x, MARGIN);
    containers.push(box);
    x += box.width + CONTAINER_GAP;
    maxBottom = Math.max(maxBottom, box.y + box.height);
  }

  // Shared value objects, repositories and services sit in a row below
  // the aggregate containers.
  const nodes: NodeBox[] = [];
  let sx = MARGIN;
  const sy = maxBottom + CONTAINER_GAP;
  let rowBottom = sy;

  const placeStandalone = (
    node: Omit<NodeBox, "x" | "y" | "width" | "height">,
    lineCount: number
  ) => {
    const h = nodeHeight(lineCount);
    nodes.push({ ...node, x: sx, y: sy, width: NODE_WIDTH, height: h });
    sx += NODE_WIDTH + NODE_GAP;
    rowBottom = Math.max(rowBottom, sy + h);
  };

  for (const vo of model.valueObjects) {
    const lines = entityLines(vo.fields, vo.methods);
    placeStandalone(
      { qname: vo.name, kind: "valueobject", isRoot: false, label: vo.name, lines },
      lines.length
    );
  }
  for (const repo of model.repositories) {
    const lines = [`for ${repo.forAggregate}`];
    placeStandalone(
      { qname: repo.name, kind: "repository", isRoot: false, label: repo.name, lines },
      lines.length
    );
  }
  for (const service of model.services) {
    const lines = service.methods.map((m) => `${m.name}()`);
    placeStandalone(
      { qname: service.name, kind: "service", isRoot: false, label: service.name, lines },
      lines.length
    );
  }

  const edges: Edge[] = [];
  const idOwners = rootIdIndex(model);
  for (const agg of model.aggregates) {
    const seen = new Set<string>();
    for (const entity of agg.entities) {
      for (const field of [...entity.fields, ...agg.events.flatMap((e) => e.fields)]) {
        const owner = idOwners.get(field.type.replace(/^list</, "").replace(/>$/, ""));
        if (owner !== undefined && owner !== agg.name && !seen.has(owner)) {
          seen.add(owner);
          edges.push({ from: agg.name, to: owner, kind: "id-reference", dashed: true });
        }
      }
    }
  }
  for (const repo of model.repositories) {
    edges.push({ from: repo.name, to: repo.forAggregate, kind: "repository-for", dashed: false });
  }

  const width = Math.max(x, sx) - NODE_GAP + MARGIN;
  const height = rowBottom + MARGIN;
  return { width, height, containers, nodes, edges };
}
