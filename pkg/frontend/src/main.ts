import { SessionApi } from "./api.js";
import { ChatController, type ChatState } from "./chat.js";
import { renderChatHtml } from "./render.js";

const builtinSelect = document.getElementById("builtin") as HTMLSelectElement;
const specInput = document.getElementById("spec") as HTMLTextAreaElement;
const startButton = document.getElementById("start") as HTMLButtonElement;
const bannerEl = document.getElementById("banner") as HTMLElement;
const chatEl = document.getElementById("chat") as HTMLElement;

function render(state: ChatState): void {
  bannerEl.hidden = state.banner === null;
  bannerEl.textContent = state.banner ?? "";
  startButton.disabled = state.busy;
  chatEl.innerHTML = state.view ? renderChatHtml(state.view, state.busy) : "";
}

const controller = new ChatController(new SessionApi(), render);

builtinSelect.addEventListener("change", () => {
  specInput.hidden = builtinSelect.value !== "";
});

startButton.addEventListener("click", () => {
  const selection =
    builtinSelect.value !== ""
      ? { builtin: builtinSelect.value }
      : { spec: specInput.value };
  void controller.start(selection).then((ok) => {
    // keep the id in the URL so a refresh can restore the session
    if (ok && controller.state.sessionId !== null) {
      location.hash = controller.state.sessionId;
    }
  });
});

chatEl.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const button = target.closest("button.answer") as HTMLButtonElement | null;
  if (button && button.dataset.answer !== undefined) {
    void controller.answer(button.dataset.answer);
  }
});

if (location.hash.length > 1) {
  void controller.resume(location.hash.slice(1));
}
