export type Mode = "register" | "query" | "measure" | "texture-browse";

export const ALL_MODES: Mode[] = ["register", "query", "measure", "texture-browse"];

/**
 * Viewport state: exactly one mode is active at any time, and the register
 * mode is refused once the project is aligned.
 */
export class ViewState {
  private activeMode: Mode = "query";
  aligned = false;

  get mode(): Mode {
    return this.activeMode;
  }

  canEnter(mode: Mode): boolean {
    if (mode === "register") return !this.aligned;
    return true;
  }

  setMode(mode: Mode): void {
    if (!ALL_MODES.includes(mode)) throw new Error(`unknown mode ${mode}`);
    if (!this.canEnter(mode)) {
      throw new Error(`mode ${mode} is not available (project already aligned)`);
    }
    this.activeMode = mode;
  }

  /** Leaving register mode after alignment happens automatically. */
  markAligned(): void {
    this.aligned = true;
    if (this.activeMode === "register") this.activeMode = "query";
  }
}
