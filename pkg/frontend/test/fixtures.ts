import type { DiagnosticJson, ModelJson } from "../src/api.js";

/** Two aggregates; Order carries an id reference to Customer. */
export const orderingModel: ModelJson = {
  name: "Ordering",
  aggregates: [
    {
      name: "Order",
      entities: [
        {
          name: "Order",
          isRoot: true,
          idType: "OrderId",
          fields: [
            { name: "customer", type: "CustomerId" },
            { name: "total", type: "Money" },
            { name: "lines", type: "list<OrderLine>" },
          ],
          methods: [
            {
              name: "addLine",
              params: [{ name: "line", type: "OrderLine" }],
              returnType: null,
              visibility: "public",
              mutates: true,
            },
          ],
        },
        {
          name: "OrderLine",
          isRoot: false,
          idType: "OrderLineId",
          fields: [{ name: "quantity", type: "int" }],
          methods: [],
        },
      ],
      valueObjects: [
        {
          name: "Money",
          fields: [
            { name: "amount", type: "decimal" },
            { name: "currency", type: "string" },
          ],
          methods: [],
          isIdentifierOf: null,
        },
      ],
      events: [
        {
          name: "OrderPlaced",
          fields: [{ name: "orderId", type: "OrderId" }],
        },
      ],
    },
    {
      name: "Customer",
      entities: [
        {
          name: "Customer",
          isRoot: true,
          idType: "CustomerId",
          fields: [{ name: "name", type: "string" }],
          methods: [],
        },
      ],
      valueObjects: [],
      events: [],
    },
  ],
  valueObjects: [],
  repositories: [{ name: "OrderRepository", forAggregate: "Order" }],
  services: [
    {
      name: "PricingService",
      methods: [
        {
          name: "priceOf",
          params: [{ name: "order", type: "OrderId" }],
          returnType: "decimal",
          visibility: "public",
          mutates: false,
        },
      ],
    },
  ],
};

export const crossRefDiagnostic: DiagnosticJson = {
  ruleId: "S3",
  severity: "error",
  subject: "Order.Order.customer",
  message:
    "field 'Order.Order.customer' references an entity in another aggregate; use an identifier value object",
  repairs: [{ id: "use-id-reference", title: "Replace with CustomerId" }],
};

export const smallAggregateWarning: DiagnosticJson = {
  ruleId: "R1",
  severity: "warning",
  subject: "Customer",
  message: "aggregate 'Customer' is small",
  repairs: [],
};
