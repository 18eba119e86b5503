/**
 * Keyboard and slider bindings. Each binding maps one user action to
 * exactly one view-model call, which in turn emits at most one protocol
 * message (rate limited to the tick cadence for the continuous inputs).
 *
 *   ArrowUp / ArrowDown  pedestrian speed ±0.1 m/s (never below 0)
 *   Space                pause / resume toggle
 *   KeyR                 reset (new episode, same seed unless changed)
 *   intention slider     intention in [0, 1]
 */
import { SessionViewModel } from "./viewmodel.js";

export interface KeyEventLike {
  code: string;
  repeat?: boolean;
  preventDefault?: () => void;
}

export class InputBinder {
  constructor(private vm: SessionViewModel, private resetSeed: () => number) {}

  onKeyDown(ev: KeyEventLike): void {
    if (ev.code === "ArrowUp" || ev.code === "ArrowDown") {
      ev.preventDefault?.();
      const dir = ev.code === "ArrowUp" ? 1 : -1;
      if (!ev.repeat) {
        // discrete press bumps once; holding repeats per tick
        this.vm.bumpVy(dir);
        this.vm.setVyKeyHeld(dir, true);
      }
    } else if (ev.code === "Space" && !ev.repeat) {
      ev.preventDefault?.();
      this.vm.togglePause();
    } else if (ev.code === "KeyR" && !ev.repeat) {
      this.vm.reset(this.resetSeed());
    }
  }

  onKeyUp(ev: KeyEventLike): void {
    if (ev.code === "ArrowUp") this.vm.setVyKeyHeld(1, false);
    else if (ev.code === "ArrowDown") this.vm.setVyKeyHeld(-1, false);
  }

  onIntentionSlider(value: number): void {
    this.vm.setIntention(value);
  }
}
