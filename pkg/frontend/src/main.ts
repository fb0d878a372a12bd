// DOM wiring for the latent-code explorer. All model math happens on the
// service; this file only moves numbers between sliders, fetches and canvases.

import { endpointFromQuery, ServiceClient } from './api.js';
import { drawEncounter, drawProfile } from './plot.js';
import { createState, debounce, ExplorerState, ResponseGate } from './state.js';
import { TraversalPlayer } from './traversal.js';

const DEBOUNCE_MS = 60; // >= 50 ms between slider motion and decode calls

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function init(): Promise<void> {
  const endpoint = endpointFromQuery(window.location.search);
  const client = new ServiceClient(endpoint);
  const banner = el<HTMLDivElement>('banner');
  const sliderBox = el<HTMLDivElement>('sliders');
  const canvas = el<HTMLCanvasElement>('encounter');
  const ctx = canvas.getContext('2d')!;
  const profileCanvases = ['distance', 'speed', 'direction'].map((name) => {
    const c = el<HTMLCanvasElement>(`profile-${name}`);
    return { name, canvas: c, ctx: c.getContext('2d')! };
  });
  el<HTMLSpanElement>('endpoint').textContent = endpoint;

  const setOffline = (off: boolean): void => {
    banner.style.display = off ? 'block' : 'none';
  };

  let state: ExplorerState;
  let info;
  try {
    info = await client.model();
  } catch {
    setOffline(true);
    banner.textContent = `service unreachable at ${endpoint}. start it with: ` +
      'encforge serve --checkpoint <file> --port 8787';
    return;
  }
  state = createState(info.K);
  el<HTMLSpanElement>('model-info').textContent =
    `${info.variant}  K=${info.K}  T=${info.T}  H=${info.H}`;

  const gate = new ResponseGate();
  const profileGate = new ResponseGate();

  async function refresh(): Promise<void> {
    const z = state.z.slice();
    const seq = gate.issue();
    const pseq = profileGate.issue();
    try {
      const enc = await client.decode(z);
      if (gate.shouldApply(seq)) {
        state.encounter = enc;
        state.offline = false;
        setOffline(false);
        drawEncounter(ctx, enc, canvas.width, canvas.height, state.playbackIndex);
      }
      const prof = await client.rationality(z);
      if (profileGate.shouldApply(pseq)) {
        state.profiles = prof;
        const colors: Record<string, string> = {
          distance: '#4c78a8', speed: '#f58518', direction: '#54a24b',
        };
        for (const { name, canvas: c, ctx: pctx } of profileCanvases) {
          drawProfile(pctx, (prof as unknown as Record<string, number[]>)[name],
                      c.width, c.height, colors[name]);
        }
      }
    } catch {
      state.offline = true;
      setOffline(true); // sliders stay enabled; next motion retries
    }
  }

  const requestRefresh = debounce(() => void refresh(), DEBOUNCE_MS);

  const sliders: HTMLInputElement[] = [];
  const readouts: HTMLSpanElement[] = [];
  for (let k = 0; k < info.K; k++) {
    const row = document.createElement('div');
    row.className = 'slider-row';
    const label = document.createElement('label');
    label.textContent = `z${k}`;
    const slider = document.createElement('input');
    slider.type = 'range';
    slider.min = '-1';
    slider.max = '1';
    slider.step = '0.01';
    slider.value = '0';
    slider.dataset.code = String(k);
    const readout = document.createElement('span');
    readout.textContent = '0.00';
    const play = document.createElement('button');
    play.textContent = '▶';
    play.title = `traverse z${k} from -1 to 1`;
    play.addEventListener('click', () => startTraversal(k));
    slider.addEventListener('input', () => {
      state.z[k] = Number(slider.value);
      readout.textContent = Number(slider.value).toFixed(2);
      requestRefresh();
    });
    row.append(label, slider, readout, play);
    sliderBox.append(row);
    sliders.push(slider);
    readouts.push(readout);
  }

  let player: TraversalPlayer | null = null;
  const scrub = el<HTMLInputElement>('scrub');
  const pauseBtn = el<HTMLButtonElement>('pause');

  function startTraversal(code: number): void {
    player?.pause();
    player = new TraversalPlayer({
      onFrame: (index, value) => {
        state.z[code] = value;
        sliders[code].value = String(value);
        readouts[code].textContent = value.toFixed(2);
        scrub.value = String(index);
        void refresh(); // animation frames skip the debounce
      },
    });
    scrub.max = String(player.values.length - 1);
    player.play();
  }

  pauseBtn.addEventListener('click', () => player?.pause());
  scrub.addEventListener('input', () => player?.scrub(Number(scrub.value)));

  await refresh();
}

void init();
