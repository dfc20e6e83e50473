import { describe, expect, it } from "vitest";

import { computeLayout } from "../src/layout.js";
import { renderSvg } from "../src/render.js";
import { crossRefDiagnostic, orderingModel, smallAggregateWarning } from "./fixtures.js";

describe("renderSvg", () => {
  const layout = computeLayout(orderingModel);

  it("renders one aggregate group per container", () => {
    const svg = renderSvg(layout, []);
    expect(svg.match(/class="aggregate"/g)?.length).toBe(2);
    expect(svg).toContain('data-name="Order"');
    expect(svg).toContain('data-name="Customer"');
  });

  it("distinguishes the root entity with a root class", () => {
    const svg = renderSvg(layout, []);
    expect(svg).toContain('class="node entity root" data-qname="Order.Order"');
    expect(svg).toContain('class="node entity" data-qname="Order.OrderLine"');
  });

  it("badges the node owning a violated subject with the rule id", () => {
    const svg = renderSvg(layout, [crossRefDiagnostic]);
    expect(svg).toContain('data-rule="S3" data-subject="Order.Order.customer"');
    expect(svg).toContain(">S3</text>");
    expect(svg).toContain("has-error");
  });

  it("keeps warning and error severities apart", () => {
    const svg = renderSvg(layout, [smallAggregateWarning]);
    expect(svg).toContain('class="badge warning"');
    expect(svg).not.toContain("has-error");
  });

  it("renders dashed inter-aggregate edges", () => {
    const svg = renderSvg(layout, []);
    expect(svg).toMatch(/class="edge id-reference"[^/]*stroke-dasharray/);
  });

  it("escapes markup in labels", () => {
    const hostile = computeLayout({
      ...orderingModel,
      aggregates: [],
      services: [
        {
          name: "A<B>",
          methods: [],
        },
      ],
    });
    const svg = renderSvg(hostile, []);
    expect(svg).toContain("A&lt;B&gt;");
  });

  it("is a pure function of its inputs", () => {
    expect(renderSvg(layout, [crossRefDiagnostic])).toBe(renderSvg(layout, [crossRefDiagnostic]));
  });
});
