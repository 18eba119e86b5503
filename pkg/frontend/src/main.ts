/** Page bootstrap: wires DOM elements to the client, view model and renderer. */
import { SessionClient, SocketLike } from "./client.js";
import { InputBinder } from "./input.js";
import { drawScene, drawStripChart, Canvas2D } from "./scene.js";
import { SessionViewModel } from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(): void {
  const sceneCanvas = el<HTMLCanvasElement>("scene");
  const chartCanvas = el<HTMLCanvasElement>("chart");
  const addressBox = el<HTMLInputElement>("address");
  const seedBox = el<HTMLInputElement>("seed");
  const controllerBox = el<HTMLSelectElement>("controller");
  const intentionSlider = el<HTMLInputElement>("intention");
  const connectBtn = el<HTMLButtonElement>("connect");
  const banner = el<HTMLDivElement>("banner");

  const sceneCtx = sceneCanvas.getContext("2d") as unknown as Canvas2D;
  const chartCtx = chartCanvas.getContext("2d") as unknown as Canvas2D;

  let vm = new SessionViewModel(0.0, Number(intentionSlider.value));
  let client: SessionClient | null = null;

  const render = () => {
    drawScene(sceneCtx, vm);
    drawStripChart(chartCtx, vm);
    banner.textContent =
      vm.status === "open" ? (vm.lastError ?? "") :
      vm.status === "connecting" ? "connecting…" :
      `${vm.lastError ?? "disconnected"} — press Connect to retry`;
    banner.className = vm.status === "open" ? "banner ok" : "banner warn";
  };

  const connect = () => {
    vm = new SessionViewModel(0.0, Number(intentionSlider.value));
    client = new SessionClient(vm, (url) => new WebSocket(url) as unknown as SocketLike, render);
    const binder = new InputBinder(vm, () => Number(seedBox.value));
    document.onkeydown = (ev) => { binder.onKeyDown(ev); client?.flush(); render(); };
    document.onkeyup = (ev) => { binder.onKeyUp(ev); client?.flush(); };
    intentionSlider.oninput = () => {
      binder.onIntentionSlider(Number(intentionSlider.value));
      client?.flush();
      render();
    };
    client.connect(addressBox.value, {
      controller: controllerBox.value,
      seed: Number(seedBox.value),
    });
    render();
  };

  connectBtn.onclick = connect;
  render();
}

boot();
