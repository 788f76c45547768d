/** Client for the scan service JSON API (POST /scan, GET /health). */

export const HEAD_ORDER = [
  "CWE-119",
  "CWE-120",
  "CWE-469",
  "CWE-476",
  "CWE-other",
] as const;

export type HeadName = (typeof HEAD_ORDER)[number];

export interface ScanResponse {
  probabilities: Record<string, number>;
  token_count: number;
  model_format_version: number;
}

export class ScanError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "ScanError";
  }
}

export async function scanCode(baseUrl: string, code: string): Promise<ScanResponse> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}/scan`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ code }),
    });
  } catch (err) {
    throw new ScanError(`cannot reach the scan service: ${(err as Error).message}`);
  }
  if (!response.ok) {
    let reason = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) reason = `${reason}: ${body.error}`;
    } catch {
      // non-JSON error body; the status line is enough
    }
    throw new ScanError(`scan failed (${reason})`, response.status);
  }
  return (await response.json()) as ScanResponse;
}

export async function checkHealth(baseUrl: string): Promise<boolean> {
  try {
    const response = await fetch(`${baseUrl}/health`);
    return response.ok;
  } catch {
    return false;
  }
}
