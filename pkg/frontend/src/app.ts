/** DOM wiring: left image panel, right chat panel, bottom input row with
 * Submit and Undo. All rendering is a function of UiSessionState. */

import { ApiClient } from "./api.js";
import { TranscriptEntry, UiController, UiSessionState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function bubble(entry: TranscriptEntry): HTMLElement {
  const wrapper = document.createElement("div");
  wrapper.className = `bubble ${entry.speaker}`;
  const text = document.createElement("p");
  text.textContent = entry.text;
  wrapper.appendChild(text);
  if (entry.functions && entry.functions.length > 0) {
    const details = document.createElement("details");
    details.className = "plan";
    const summary = document.createElement("summary");
    summary.textContent = "applied functions";
    details.appendChild(summary);
    const list = document.createElement("ul");
    for (const name of entry.functions) {
      const item = document.createElement("li");
      item.textContent = name;
      list.appendChild(item);
    }
    details.appendChild(list);
    wrapper.appendChild(details);
  }
  return wrapper;
}

export function render(state: UiSessionState): void {
  const image = el<HTMLImageElement>("photo");
  const placeholder = el<HTMLDivElement>("photo-placeholder");
  if (state.imageUrl !== null) {
    image.src = state.imageUrl;
    image.hidden = false;
    placeholder.hidden = true;
  } else {
    image.hidden = true;
    placeholder.hidden = false;
  }

  const chat = el<HTMLDivElement>("chat");
  chat.replaceChildren(...state.transcript.map(bubble));
  chat.scrollTop = chat.scrollHeight;

  const submit = el<HTMLButtonElement>("submit");
  const undoButton = el<HTMLButtonElement>("undo");
  const input = el<HTMLInputElement>("instruction");
  submit.disabled = state.busy || state.imageUrl === null;
  undoButton.disabled = state.busy || !state.undoEnabled;
  input.disabled = state.busy;

  el<HTMLSpanElement>("token-total").textContent = String(state.tokenTotal);
  const uploadError = el<HTMLDivElement>("upload-error");
  uploadError.textContent = state.uploadError ?? "";
  uploadError.hidden = state.uploadError === null;
}

export function wire(controller: UiController): void {
  const input = el<HTMLInputElement>("instruction");

  el<HTMLButtonElement>("submit").addEventListener("click", () => {
    const text = input.value;
    input.value = "";
    void controller.submitInstruction(text);
  });
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      const text = input.value;
      input.value = "";
      void controller.submitInstruction(text);
    }
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    void controller.undoClick();
  });
  el<HTMLInputElement>("file").addEventListener("change", (event) => {
    const files = (event.target as HTMLInputElement).files;
    if (files !== null && files.length > 0) {
      const file = files[0];
      if (file !== undefined) void controller.uploadImage(file, file.name);
    }
  });
}

export function boot(baseUrl = ""): UiController {
  const api = new ApiClient(baseUrl);
  const controller = new UiController(api, render);
  wire(controller);
  void controller.init();
  return controller;
}

declare global {
  interface Window {
    chateditController?: UiController;
  }
}

if (typeof document !== "undefined" && document.getElementById("chat") !== null) {
  window.chateditController = boot();
}
