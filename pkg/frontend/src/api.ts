/** Typed client for the fluxbed REST API.
 *
 * The console performs no numerics of its own; every number it displays
 * comes from one of these endpoints. Shapes mirror docs/api.md in the
 * backend repository.
 */

export interface AxisSpec {
  label: string;
  start: number;
  stop: number;
  n_points: number;
}

export interface ScanData {
  axis_x: AxisSpec;
  axis_y: AxisSpec;
  values: number[][];
  corrected: boolean;
  probe_frequency_ghz: number;
  seed: number;
}

export interface LatticeFit {
  primitive_vectors: number[][];
  origin: number[];
  residual_rms: number;
  n_centers_used: number;
  center_source: string;
}

export interface Correction {
  T: number[][];
  offset: number[];
  axes: string[];
}

export interface IndexedCenter {
  center: number[];
  index: number[];
}

export interface FitResponse {
  scan_id: string;
  fit: LatticeFit;
  correction: Correction;
  indexed_centers: IndexedCenter[];
}

export interface ProposalResponse extends FitResponse {
  centers: number[][];
}

export interface SessionSummary {
  session_id: string;
  revision: number;
  n_qubits: number;
  line_labels: string[];
  seed: number;
  has_correction: boolean;
  scans: Record<string, string>;
}

export interface ScanJob {
  scan_id: string;
  status: string;
  error?: string | null;
}

export interface Verification {
  axis_angle_errors_deg: number[];
  residual_offdiag_fraction: number;
  refit: {
    primitive_vectors: number[][];
    origin: number[];
    residual_rms: number;
    n_centers_used: number;
  };
}

export interface DeviceConfig {
  n_qubits?: number;
  designed_mutuals?: number | number[];
  crosstalk_fraction?: number;
  random_offsets?: boolean;
  seed?: number;
}

/** Non-2xx response, carrying the server's machine-readable reason. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ConsoleApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail =
        typeof payload?.detail === "string"
          ? payload.detail
          : JSON.stringify(payload?.detail ?? payload);
      throw new ApiError(resp.status, detail);
    }
    return payload as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/health");
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return this.request("GET", "/sessions");
  }

  createSession(config?: DeviceConfig): Promise<{ summary: SessionSummary }> {
    return this.request("POST", "/sessions", config ? { config } : {});
  }

  getSession(sid: string): Promise<{ summary: SessionSummary }> {
    return this.request("GET", `/sessions/${sid}`);
  }

  startScan(
    sid: string,
    body: {
      axis_x?: AxisSpec;
      axis_y?: AxisSpec;
      mode?: string;
      use_correction?: boolean;
      seed?: number;
    } = {},
  ): Promise<ScanJob> {
    return this.request("POST", `/sessions/${sid}/scans`, body);
  }

  scanStatus(sid: string, scanId: string): Promise<ScanJob> {
    return this.request("GET", `/sessions/${sid}/scans/${scanId}`);
  }

  scanData(sid: string, scanId: string): Promise<{ data: ScanData }> {
    return this.request("GET", `/sessions/${sid}/scans/${scanId}/data`);
  }

  proposal(sid: string, scanId: string): Promise<ProposalResponse> {
    return this.request("GET", `/sessions/${sid}/scans/${scanId}/proposal`);
  }

  fit(
    sid: string,
    body: { scan_id: string; centers: number[][]; indices?: number[][] },
  ): Promise<FitResponse> {
    return this.request("POST", `/sessions/${sid}/fit`, body);
  }

  applyCorrection(
    sid: string,
    correction: Correction,
  ): Promise<{ correction: Correction }> {
    return this.request("POST", `/sessions/${sid}/correction`, correction);
  }

  clearCorrection(sid: string): Promise<{ correction: null }> {
    return this.request("DELETE", `/sessions/${sid}/correction`);
  }

  getCorrection(sid: string): Promise<{ correction: Correction | null }> {
    return this.request("GET", `/sessions/${sid}/correction`);
  }

  verification(sid: string): Promise<{ verification: Verification }> {
    return this.request("GET", `/sessions/${sid}/verification`);
  }

  /** Poll a scan job until it leaves the running state. */
  async waitForScan(
    sid: string,
    scanId: string,
    opts: { intervalMs?: number; timeoutMs?: number } = {},
  ): Promise<ScanJob> {
    const interval = opts.intervalMs ?? 100;
    const deadline = Date.now() + (opts.timeoutMs ?? 30_000);
    for (;;) {
      const job = await this.scanStatus(sid, scanId);
      if (job.status !== "running") return job;
      if (Date.now() > deadline) {
        throw new Error(`scan ${scanId} still running after timeout`);
      }
      await new Promise((r) => setTimeout(r, interval));
    }
  }
}
