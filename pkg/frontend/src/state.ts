/** UI session state and the controller driving it.
 *
 * The state is a pure projection of server responses: every image URL and
 * stack depth comes from the last reply, and `restoreFromServer` rebuilds
 * an equivalent transcript from the history endpoint after a page reload.
 * The busy flag serializes turns per tab: while a turn is in flight, submit
 * and undo are suppressed, not queued.
 */

import { ApiError, SessionApi } from "./api.js";

export type Speaker = "user" | "assistant" | "note" | "error";

export interface TranscriptEntry {
  speaker: Speaker;
  text: string;
  /** functions resolved for this turn; shown in a collapsible detail row */
  functions?: string[];
}

export interface UiSessionState {
  sessionId: string | null;
  imageUrl: string | null;
  transcript: TranscriptEntry[];
  busy: boolean;
  undoEnabled: boolean;
  stackDepth: number;
  tokenTotal: number;
  uploadError: string | null;
}

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    imageUrl: null,
    transcript: [],
    busy: false,
    undoEnabled: false,
    stackDepth: 0,
    tokenTotal: 0,
    uploadError: null,
  };
}

export type StateListener = (state: UiSessionState) => void;

export class UiController {
  state: UiSessionState = initialState();

  constructor(
    private readonly api: SessionApi,
    private readonly onChange: StateListener = () => {},
  ) {}

  private set(patch: Partial<UiSessionState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  private append(...entries: TranscriptEntry[]): void {
    this.set({ transcript: [...this.state.transcript, ...entries] });
  }

  async init(): Promise<void> {
    const sessionId = await this.api.createSession();
    this.set({ ...initialState(), sessionId });
  }

  /** Upload (or re-upload) the photo. Resets the image version stack on the
   * server; the transcript is kept. Mutually exclusive with a running turn. */
  async uploadImage(file: Blob, name?: string): Promise<void> {
    if (this.state.busy || this.state.sessionId === null) return;
    this.set({ busy: true, uploadError: null });
    try {
      const result = await this.api.uploadImage(this.state.sessionId, file, name);
      this.set({
        busy: false,
        imageUrl: this.api.imageUrl(result.image_url),
        stackDepth: result.stack_depth,
        undoEnabled: result.stack_depth >= 2,
      });
    } catch (error) {
      this.set({
        busy: false,
        uploadError: error instanceof Error ? error.message : String(error),
      });
    }
  }

  /** Send one instruction. No-op while busy (the double-click gate) or
   * before an image exists. The user bubble appears immediately; the
   * assistant bubble and the refreshed image arrive with the response. */
  async submitInstruction(text: string): Promise<void> {
    const instruction = text.trim();
    if (this.state.busy || instruction === "") return;
    if (this.state.sessionId === null || this.state.imageUrl === null) return;

    this.set({ busy: true });
    this.append({ speaker: "user", text: instruction });
    try {
      const result = await this.api.postTurn(this.state.sessionId, instruction);
      this.append({
        speaker: "assistant",
        text: result.reply,
        functions: result.plan.functions,
      });
      this.set({
        busy: false,
        imageUrl: this.api.imageUrl(result.image_url),
        stackDepth: result.stack_depth,
        undoEnabled: result.stack_depth >= 2,
        tokenTotal: result.token_total,
      });
    } catch (error) {
      // network failure: error bubble, everything else untouched
      this.append({
        speaker: "error",
        text: error instanceof Error ? error.message : String(error),
      });
      this.set({ busy: false });
    }
  }

  /** Pop one image version. Enabled only when the server reports a stack
   * of at least two; a 409 from a stale view corrects the flag. */
  async undoClick(): Promise<void> {
    if (this.state.busy || !this.state.undoEnabled || this.state.sessionId === null) return;
    this.set({ busy: true });
    try {
      const result = await this.api.undo(this.state.sessionId);
      this.append({ speaker: "note", text: "undid the last edit" });
      this.set({
        busy: false,
        imageUrl: this.api.imageUrl(result.image_url),
        stackDepth: result.stack_depth,
        undoEnabled: result.stack_depth >= 2,
      });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.set({ busy: false, undoEnabled: false });
        return;
      }
      this.append({
        speaker: "error",
        text: error instanceof Error ? error.message : String(error),
      });
      this.set({ busy: false });
    }
  }

  /** Rebuild the view from the server alone (page reload path). Undo notes
   * are client-side decoration and are not reconstructed; the user and
   * assistant bubbles are. */
  async restoreFromServer(sessionId: string): Promise<void> {
    const history = await this.api.history(sessionId);
    const transcript: TranscriptEntry[] = [];
    for (const turn of history.turns) {
      transcript.push({ speaker: "user", text: turn.instruction });
      transcript.push({ speaker: "assistant", text: turn.reply, functions: turn.functions });
    }
    this.set({
      sessionId,
      transcript,
      imageUrl:
        history.stack_depth > 0
          ? this.api.imageUrl(`/sessions/${sessionId}/image?v=${history.stack_depth}`)
          : null,
      stackDepth: history.stack_depth,
      undoEnabled: history.stack_depth >= 2,
      tokenTotal: history.token_total,
      busy: false,
      uploadError: null,
    });
  }

  /** The conversation bubbles (user/assistant only), for equivalence checks
   * between a live session and a reload-reconstructed one. */
  conversationPairs(): Array<[Speaker, string]> {
    return this.state.transcript
      .filter((e) => e.speaker === "user" || e.speaker === "assistant")
      .map((e) => [e.speaker, e.text]);
  }
}
