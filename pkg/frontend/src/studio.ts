/**
 * Studio view state machine.
 *
 * Holds the last snapshot the client saw and its revision, recomputes the
 * layout and SVG on every change, and turns a stale-revision conflict into
 * an explicit "reloadRequired" status instead of an exception the UI has
 * to guess about.
 */

import {
  ConflictError,
  StudioClient,
  type DiagnosticJson,
  type ModelJson,
} from "./api.js";
import { computeLayout, type Layout } from "./layout.js";
import { renderSvg } from "./render.js";

export type StudioStatus = "empty" | "ready" | "reloadRequired";

export interface StudioState {
  status: StudioStatus;
  revision: number;
  model: ModelJson | null;
  diagnostics: DiagnosticJson[];
  layout: Layout | null;
  svg: string;
  /** Revision the server reported when a conflict was detected. */
  conflictRevision: number | null;
}

export class Studio {
  private state: StudioState = {
    status: "empty",
    revision: 0,
    model: null,
    diagnostics: [],
    layout: null,
    svg: "",
    conflictRevision: null,
  };

  constructor(private readonly client: StudioClient) {}

  getState(): StudioState {
    return this.state;
  }

  private accept(revision: number, model: ModelJson, diagnostics: DiagnosticJson[]) {
    const layout = computeLayout(model);
    this.state = {
      status: "ready",
      revision,
      model,
      diagnostics,
      layout,
      svg: renderSvg(layout, diagnostics),
      conflictRevision: null,
    };
  }

  /** Fetch the current model and diagnostics; clears any pending conflict. */
  async load(): Promise<StudioState> {
    const snapshot = await this.client.getModel();
    const diags = await this.client.getDiagnostics();
    this.accept(snapshot.revision, snapshot.model, diags.diagnostics);
    return this.state;
  }

  /**
   * Apply a one-click repair from a diagnostic badge.  On a stale revision
   * the state flips to reloadRequired and the caller is expected to load()
   * before retrying.
   */
  async applyRepair(subject: string, ruleId: string, repairId: string): Promise<StudioState> {
    try {
      const result = await this.client.applyRepair(subject, ruleId, repairId, this.state.revision);
      this.accept(result.revision, result.model, result.diagnostics);
    } catch (err) {
      if (err instanceof ConflictError) {
        this.state = {
          ...this.state,
          status: "reloadRequired",
          conflictRevision: err.currentRevision,
        };
      } else {
        throw err;
      }
    }
    return this.state;
  }

  /** Replace the whole model text, same conflict handling as repairs. */
  async saveText(text: string): Promise<StudioState> {
    try {
      const result = await this.client.putModel(text, this.state.revision);
      this.accept(result.revision, result.model, result.diagnostics);
    } catch (err) {
      if (err instanceof ConflictError) {
        this.state = {
          ...this.state,
          status: "reloadRequired",
          conflictRevision: err.currentRevision,
        };
      } else {
        throw err;
      }
    }
    return this.state;
  }
}
