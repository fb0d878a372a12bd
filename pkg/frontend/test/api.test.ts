import { describe, expect, it } from 'vitest';

import { endpointFromQuery, FetchLike, ServiceClient } from '../src/api.js';

function mockFetch(routes: Record<string, unknown>): { fetch: FetchLike; calls: string[] } {
  const calls: string[] = [];
  const fetch: FetchLike = async (url, init) => {
    calls.push(`${init?.method ?? 'GET'} ${url}`);
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    if (!(path in routes)) {
      return new Response(JSON.stringify({ error: 'no route' }), { status: 404 });
    }
    return new Response(JSON.stringify(routes[path]), { status: 200 });
  };
  return { fetch, calls };
}

describe('endpointFromQuery', () => {
  it('defaults to the local service', () => {
    expect(endpointFromQuery('')).toBe('http://127.0.0.1:8787');
  });

  it('honors ?endpoint= and strips a trailing slash', () => {
    expect(endpointFromQuery('?endpoint=http://10.0.0.5:9000/'))
      .toBe('http://10.0.0.5:9000');
  });
});

describe('ServiceClient', () => {
  it('reads model info (slider count comes from K)', async () => {
    const { fetch } = mockFetch({ '/model': { K: 10, T: 50, H: 64, variant: 'mtg' } });
    const client = new ServiceClient('http://svc', fetch);
    const info = await client.model();
    expect(info.K).toBe(10);
    expect(info.variant).toBe('mtg');
  });

  it('posts the code vector to /decode and returns the payload untouched', async () => {
    const payload = { s1: [[0.1, 0.2]], s2: [[-0.1, -0.2]] };
    const { fetch, calls } = mockFetch({ '/decode': payload });
    const client = new ServiceClient('http://svc', fetch);
    const out = await client.decode([0, 0, 0]);
    expect(out).toEqual(payload);
    expect(calls).toEqual(['POST http://svc/decode']);
  });

  it('raises on error statuses', async () => {
    const { fetch } = mockFetch({});
    const client = new ServiceClient('http://svc', fetch);
    await expect(client.decode([0])).rejects.toThrow('POST /decode -> 404');
  });
});
