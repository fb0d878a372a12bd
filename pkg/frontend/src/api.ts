// Typed client for the encforge inference service. Every number shown in
// the UI originates from one of these responses.

export type Point = [number, number];

export interface ModelInfo {
  K: number;
  T: number;
  H: number;
  variant: string;
}

export interface DecodeResponse {
  s1: Point[];
  s2: Point[];
}

export interface RationalityResponse {
  distance: number[];
  speed: number[];
  direction: number[];
}

export interface SweepFrame {
  value: number;
  s1: Point[];
  s2: Point[];
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export function endpointFromQuery(search: string, fallback = 'http://127.0.0.1:8787'): string {
  const params = new URLSearchParams(search);
  const endpoint = params.get('endpoint');
  return endpoint ? endpoint.replace(/\/$/, '') : fallback;
}

export class ServiceClient {
  constructor(
    private readonly endpoint: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.endpoint + path);
    if (!resp.ok) {
      throw new Error(`GET ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.endpoint + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      throw new Error(`POST ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  model(): Promise<ModelInfo> {
    return this.getJson<ModelInfo>('/model');
  }

  decode(z: number[]): Promise<DecodeResponse> {
    return this.postJson<DecodeResponse>('/decode', { z });
  }

  rationality(z: number[]): Promise<RationalityResponse> {
    return this.postJson<RationalityResponse>('/rationality', { z });
  }

  sweep(code: number): Promise<{ code: number; frames: SweepFrame[] }> {
    return this.getJson<{ code: number; frames: SweepFrame[] }>(`/sweep?code=${code}`);
  }
}
