import type {
  MeasureResult,
  Pixel,
  PickResult,
  RegisterResult,
  RegistrationClicks,
  SnapResult,
  StatusInfo,
  KeyframeInfo,
  Vec3,
} from "./types.js";

/** Error body the service returns for every failure. */
export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly context: Record<string, unknown> = {},
    public readonly status = 0,
  ) {
    super(message);
  }
}

async function asApiError(resp: Response): Promise<ApiError> {
  try {
    const body = await resp.json();
    return new ApiError(body.code ?? "error", body.message ?? resp.statusText, body.context ?? {}, resp.status);
  } catch {
    return new ApiError("error", resp.statusText, {}, resp.status);
  }
}

/**
 * Typed client for the pipeline service. The UI does no geometry math beyond
 * viewport ray construction; every displayed number comes from these calls.
 */
export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await asApiError(resp);
    return (await resp.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw await asApiError(resp);
    return (await resp.json()) as T;
  }

  status(): Promise<StatusInfo> {
    return this.get("/status");
  }

  keyframes(): Promise<KeyframeInfo[]> {
    return this.get("/keyframes");
  }

  keyframeImageUrl(id: number): string {
    return `${this.baseUrl}/keyframes/${id}/image`;
  }

  textureUrl(boundary: string): string {
    return `${this.baseUrl}/textures/${boundary}`;
  }

  async modelObj(textured = false): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/model${textured ? "?textured=true" : ""}`);
    if (!resp.ok) throw await asApiError(resp);
    return resp.text();
  }

  pick(origin: Vec3, direction: Vec3): Promise<PickResult> {
    return this.post("/pick", { origin, direction });
  }

  snap(origin: Vec3, direction: Vec3): Promise<SnapResult> {
    return this.post("/snap", { origin, direction });
  }

  register(clicks: RegistrationClicks): Promise<RegisterResult> {
    return this.post("/register", { clicks });
  }

  measure(keyframeId: number, p1: Pixel, p2: Pixel): Promise<MeasureResult> {
    return this.post("/measure", { keyframe_id: keyframeId, p1, p2 });
  }
}
