/**
 * Pure SVG renderer.
 *
 * Takes a computed layout plus the current diagnostics and returns an SVG
 * document as a string.  Keeping this a string-to-string function means the
 * whole visual surface is testable without a browser: tests assert on
 * classes, data attributes and badge text directly.
 */

import type { DiagnosticJson } from "./api.js";
import type { Layout, NodeBox } from "./layout.js";

const BADGE_RADIUS = 10;

function escapeXml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Group diagnostics by the node box they should badge. */
function badgesFor(node: NodeBox, diagnostics: DiagnosticJson[]): DiagnosticJson[] {
  return diagnostics.filter(
    (d) => d.subject === node.qname || d.subject.startsWith(node.qname + ".")
  );
}

function renderNode(node: NodeBox, diagnostics: DiagnosticJson[]): string {
  const classes = ["node", node.kind];
  if (node.isRoot) {
    classes.push("root");
  }
  const badges = badgesFor(node, diagnostics);
  if (badges.some((d) => d.severity === "error")) {
    classes.push("has-error");
  } else if (badges.some((d) => d.severity === "warning")) {
    classes.push("has-warning");
  }

  const parts: string[] = [];
  parts.push(
    `<g class="${classes.join(" ")}" data-qname="${escapeXml(node.qname)}">`
  );
  parts.push(
    `<rect x="${node.x}" y="${node.y}" width="${node.width}" height="${node.height}" rx="4"/>`
  );
  parts.push(
    `<text class="title" x="${node.x + 8}" y="${node.y + 16}">${escapeXml(node.label)}</text>`
  );
  node.lines.forEach((line, i) => {
    parts.push(
      `<text class="member" x="${node.x + 8}" y="${node.y + 34 + i * 16}">${escapeXml(line)}</text>`
    );
  });
  badges.forEach((diag, i) => {
    const cx = node.x + node.width - BADGE_RADIUS - i * (2 * BADGE_RADIUS + 4);
    const cy = node.y - 2;
    parts.push(
      `<g class="badge ${diag.severity}" data-rule="${escapeXml(diag.ruleId)}" data-subject="${escapeXml(diag.subject)}">` +
        `<circle cx="${cx}" cy="${cy}" r="${BADGE_RADIUS}"/>` +
        `<title>${escapeXml(diag.message)}</title>` +
        `<text x="${cx}" y="${cy + 4}" text-anchor="middle">${escapeXml(diag.ruleId)}</text>` +
        `</g>`
    );
  });
  parts.push("</g>");
  return parts.join("");
}

export function renderSvg(layout: Layout, diagnostics: DiagnosticJson[]): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" height="${layout.height}" viewBox="0 0 ${layout.width} ${layout.height}">`
  );

  for (const edge of layout.edges) {
    const dash = edge.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<line class="edge ${edge.kind}" data-from="${escapeXml(edge.from)}" data-to="${escapeXml(edge.to)}"${dash}/>`
    );
  }

  for (const container of layout.containers) {
    parts.push(
      `<g class="aggregate" data-name="${escapeXml(container.name)}">`
    );
    parts.push(
      `<rect class="boundary" x="${container.x}" y="${container.y}" width="${container.width}" height="${container.height}" rx="8"/>`
    );
    parts.push(
      `<text class="aggregate-name" x="${container.x + 8}" y="${container.y + 16}">${escapeXml(container.name)}</text>`
    );
    diagnostics
      .filter((d) => d.subject === container.name)
      .forEach((diag, i) => {
        const cx = container.x + container.width - BADGE_RADIUS - i * (2 * BADGE_RADIUS + 4);
        const cy = container.y - 2;
        parts.push(
          `<g class="badge ${diag.severity}" data-rule="${escapeXml(diag.ruleId)}" data-subject="${escapeXml(diag.subject)}">` +
            `<circle cx="${cx}" cy="${cy}" r="${BADGE_RADIUS}"/>` +
            `<title>${escapeXml(diag.message)}</title>` +
            `<text x="${cx}" y="${cy + 4}" text-anchor="middle">${escapeXml(diag.ruleId)}</text>` +
            `</g>`
        );
      });
    for (const node of container.nodes) {
      parts.push(renderNode(node, diagnostics));
    }
    parts.push("</g>");
  }

  for (const node of layout.nodes) {
    parts.push(renderNode(node, diagnostics));
  }

  parts.push("</svg>");
  return parts.join("\n");
}
