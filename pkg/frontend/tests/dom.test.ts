// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { SessionApi, TurnResult } from "../src/api.js";
import { render, wire } from "../src/app.js";
import { UiController } from "../src/state.js";

const MARKUP = `
  <div id="photo-placeholder"></div>
  <img id="photo" hidden />
  <input id="file" type="file" />
  <div id="upload-error" hidden></div>
  <span id="token-total"></span>
  <div id="chat"></div>
  <input id="instruction" type="text" />
  <button id="submit"></button>
  <button id="undo" disabled></button>
`;

class DomFakeApi implements SessionApi {
  turns: string[] = [];
  release: (() => void) | null = null;

  async createSession() {
    return "s";
  }
  async uploadImage() {
    return { width: 4, height: 4, stack_depth: 1, image_url: "/sessions/s/image?v=1" };
  }
  async postTurn(_id: string, instruction: string): Promise<TurnResult> {
    await new Promise<void>((resolve) => {
      this.release = resolve;
    });
    this.turns.push(instruction);
    return {
      reply: "done",
      image_url: "/sessions/s/image?v=2",
      plan: { functions: ["Open Eyes"], partial: false },
      token_usage: 10,
      token_total: 10,
      stack_depth: 2,
    };
  }
  async undo() {
    return { stack_depth: 1, image_url: "/sessions/s/image?v=1" };
  }
  async history() {
    return { turns: [], stack_depth: 0, token_total: 0 };
  }
  async imageBytes() {
    return new ArrayBuffer(0);
  }
  imageUrl(path: string) {
    return path;
  }
}

describe("dom bindings", () => {
  beforeEach(() => {
    document.body.innerHTML = MARKUP;
  });

  it("disables submit until an image exists, then enables it", async () => {
    const api = new DomFakeApi();
    const controller = new UiController(api, render);
    wire(controller);
    await controller.init();
    const submit = document.getElementById("submit") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);
    await controller.uploadImage(new Blob(["x"]));
    expect(submit.disabled).toBe(false);
    const photo = document.getElementById("photo") as HTMLImageElement;
    expect(photo.hidden).toBe(false);
    expect(photo.getAttribute("src")).toContain("/sessions/s/image?v=1");
  });

  it("renders bubbles and disables controls while a turn is in flight", async () => {
    const api = new DomFakeApi();
    const controller = new UiController(api, render);
    wire(controller);
    await controller.init();
    await controller.uploadImage(new Blob(["x"]));

    const input = document.getElementById("instruction") as HTMLInputElement;
    const submit = document.getElementById("submit") as HTMLButtonElement;
    input.value = "can u open my eyes";
    submit.click();

    // in flight: busy gate reflected in the DOM
    expect(submit.disabled).toBe(true);
    expect((document.getElementById("undo") as HTMLButtonElement).disabled).toBe(true);
    expect(document.querySelectorAll("#chat .bubble.user")).toHaveLength(1);

    // second click while busy is suppressed
    input.value = "again";
    submit.click();

    api.release?.();
    await new Promise((resolve) => setTimeout(resolve, 0));

    expect(api.turns).toEqual(["can u open my eyes"]);
    expect(document.querySelectorAll("#chat .bubble.assistant")).toHaveLength(1);
    expect((document.getElementById("undo") as HTMLButtonElement).disabled).toBe(false);
    expect(document.getElementById("token-total")?.textContent).toBe("10");
    const details = document.querySelector("#chat details.plan");
    expect(details?.textContent).toContain("Open Eyes");
  });
});
