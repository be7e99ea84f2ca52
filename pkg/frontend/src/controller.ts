import { ApiClient, ApiError } from "./api.js";
import { OrbitCamera } from "./camera.js";
import { DEFAULT_MAGNIFIER, MagnifierConfig, validateMagnifier } from "./magnifier.js";
import { ViewState, Mode } from "./modes.js";
import { meshBounds, parseObj, ParsedMesh } from "./obj.js";
import type {
  MeasureResult,
  Pixel,
  PickResult,
  RegisterResult,
  StatusInfo,
  KeyframeInfo,
  Vec3,
} from "./types.js";

export interface Toast {
  kind: "info" | "error";
  text: string;
}

export interface WizardState {
  phase: "model" | "image" | "submitting" | "done";
  modelPoints: Vec3[];
  modelVertexIndices: number[];
  imagePoints: Pixel[];
}

/** Minimal API surface the controller needs (swappable in tests). */
export type ApiLike = Pick<
  ApiClient,
  "status" | "keyframes" | "modelObj" | "pick" | "snap" | "register" | "measure" | "keyframeImageUrl"
>;

/**
 * Headless application state machine.
 *
 * Owns the mode state, the viewport camera, and every service interaction;
 * the DOM layer only forwards events and draws what `state` says. All
 * displayed numbers are copied verbatim from service responses.
 */
export class InspectorController {
  readonly camera = new OrbitCamera();
  readonly view = new ViewState();
  readonly magnifier: MagnifierConfig;

  mesh: ParsedMesh | null = null;
  status: StatusInfo | null = null;
  keyframes: KeyframeInfo[] = [];

  displayedKeyframe: number | null = null;
  lastPick: PickResult | null = null;
  pendingMeasureClick: Pixel | null = null;
  lastMeasure: (MeasureResult & { p1: Pixel; p2: Pixel }) | null = null;
  wizard: WizardState = { phase: "model", modelPoints: [], modelVertexIndices: [], imagePoints: [] };
  alignmentResidual: number | null = null;
  cursor: Pixel | null = null;
  toasts: Toast[] = [];

  private pickRequestId = 0;
  private snapRequestId = 0;
  private listeners: (() => void)[] = [];

  constructor(
    private readonly api: ApiLike,
    magnifier: MagnifierConfig = DEFAULT_MAGNIFIER,
  ) {
    this.magnifier = validateMagnifier(magnifier);
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const l of this.listeners) l();
  }

  private toast(kind: Toast["kind"], text: string): void {
    this.toasts.push({ kind, text });
    this.notify();
  }

  async init(): Promise<void> {
    this.status = await this.api.status();
    this.view.aligned = this.status.aligned;
    this.keyframes = await this.api.keyframes();
    const objText = await this.api.modelObj();
    this.mesh = parseObj(objText);
    const bounds = meshBounds(this.mesh);
    this.camera.target = bounds.center;
    this.camera.distance = bounds.radius * 2.5;
    if (!this.status.aligned) {
      this.view.setMode("register");
      // the wizard's image clicks land on the first keyframe
      this.displayedKeyframe = this.keyframes.length ? this.keyframes[0].id : null;
    }
    this.notify();
  }

  setMode(mode: Mode): void {
    if (!this.view.canEnter(mode)) {
      this.toast("error", `mode ${mode} unavailable: project already aligned`);
      return;
    }
    this.view.setMode(mode);
    this.pendingMeasureClick = null;
    if (mode === "register" && this.keyframes.length) {
      this.displayedKeyframe = this.keyframes[0].id;
    }
    this.notify();
  }

  keyframeImageUrl(id: number): string {
    return this.api.keyframeImageUrl(id);
  }

  /** Click on the model viewport at canvas pixel (px, py). */
  async clickModel(px: number, py: number, width: number, height: number): Promise<void> {
    const ray = this.camera.screenToRay(px, py, width, height);
    if (this.view.mode === "query") {
      const requestId = ++this.pickRequestId;
      try {
        const result = await this.api.pick(ray.origin, ray.direction);
        if (requestId !== this.pickRequestId) return; // superseded click
        this.lastPick = result;
        this.displayedKeyframe = result.keyframe_id;
        this.notify();
      } catch (err) {
        if (requestId !== this.pickRequestId) return;
        if (err instanceof ApiError && err.code === "query_miss") {
          this.toast("info", "no model surface under the click");
        } else {
          this.toast("error", describeError(err));
        }
      }
      return;
    }
    if (this.view.mode === "register" && this.wizard.phase === "model") {
      if (this.wizard.modelPoints.length >= 4) return;
      const requestId = ++this.snapRequestId;
      try {
        const snap = await this.api.snap(ray.origin, ray.direction);
        if (requestId !== this.snapRequestId) return;
        this.wizard.modelPoints.push(snap.vertex);
        this.wizard.modelVertexIndices.push(snap.vertex_index);
        if (this.wizard.modelPoints.length === 4) this.wizard.phase = "image";
        this.notify();
      } catch (err) {
        if (requestId !== this.snapRequestId) return;
        this.toast("error", describeError(err));
      }
    }
    // clicks in measure / texture-browse mode do nothing on the model
  }

  /** Click on the keyframe image panel at image pixel (u, v). */
  async clickImage(u: number, v: number): Promise<void> {
    if (this.view.mode === "measure") {
      await this.measureClick(u, v);
      return;
    }
    if (this.view.mode === "register" && this.wizard.phase === "image") {
      this.wizard.imagePoints.push([u, v]);
      this.notify();
      if (this.wizard.imagePoints.length === 4) {
        await this.submitWizard();
      }
    }
    // image clicks in other modes are ignored (mode state machine)
  }

  private async measureClick(u: number, v: number): Promise<void> {
    if (this.displayedKeyframe === null) {
      this.toast("error", "query an image first: click the model in query mode");
      return;
    }
    if (this.pendingMeasureClick === null) {
      this.pendingMeasureClick = [u, v];
      this.notify();
      return;
    }
    const p1 = this.pendingMeasureClick;
    const p2: Pixel = [u, v];
    this.pendingMeasureClick = null;
    try {
      const result = await this.api.measure(this.displayedKeyframe, p1, p2);
      this.lastMeasure = { ...result, p1, p2 };
      this.notify();
    } catch (err) {
      if (err instanceof ApiError && err.code === "no_scale") {
        this.toast(
          "error",
          "no window scale available in this image; query a view showing a full window first",
        );
      } else {
        this.toast("error", describeError(err));
      }
    }
  }

  private async submitWizard(): Promise<void> {
    this.wizard.phase = "submitting";
    this.notify();
    try {
      const result: RegisterResult = await this.api.register({
        model: this.wizard.modelPoints,
        image: this.wizard.imagePoints,
      });
      this.alignmentResidual = result.residual_m;
      this.wizard.phase = "done";
      this.view.markAligned();
      if (this.status) this.status.aligned = true;
      this.toast("info", `aligned; residual ${result.residual_m.toExponential(3)} m`);
      this.notify();
    } catch (err) {
      // surface the server error verbatim, including the failing point index
      this.toast("error", describeError(err));
      this.wizard = { phase: "model", modelPoints: [], modelVertexIndices: [], imagePoints: [] };
      this.notify();
    }
  }

  moveCursor(u: number, v: number): void {
    this.cursor = [u, v];
    if (this.view.mode === "measure") this.notify();
  }

  /** Magnifier is active while measuring over the image panel. */
  magnifierActive(): boolean {
    return this.view.mode === "measure" && this.cursor !== null;
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    const ctx = Object.entries(err.context)
      .map(([k, v]) => `${k}=${v}`)
      .join(", ");
    return ctx ? `${err.code}: ${err.message} (${ctx})` : `${err.code}: ${err.message}`;
  }
  return String(err);
}
