import {
  ApiError,
  CaseSummary,
  ContestResponse,
  EvidenceResponse,
  MultiplicityResponse,
  WhatIfResponse,
} from "./types";

// Configuration is limited to the service base address; with the vite dev
// proxy the default empty base hits the local server.
const API_BASE: string = (import.meta as any).env?.VITE_API_BASE ?? "";

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(`${API_BASE}${path}`, init);
  if (!res.ok) {
    let body;
    try {
      body = await res.json();
    } catch {
      body = { code: "http_error", message: `HTTP ${res.status}`, details: {} };
    }
    throw new ApiError(res.status, body);
  }
  return res.json();
}

function post<T>(path: string, payload: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export function getCase(caseId: string): Promise<CaseSummary> {
  return request(`/cases/${encodeURIComponent(caseId)}`);
}

export function getEvidence(caseId: string): Promise<EvidenceResponse> {
  return request(`/cases/${encodeURIComponent(caseId)}/evidence`);
}

export function getMultiplicity(caseId: string): Promise<MultiplicityResponse> {
  return request(`/cases/${encodeURIComponent(caseId)}/multiplicity`);
}

export function postWhatIf(caseId: string, inputs: number[][]): Promise<WhatIfResponse> {
  return post(`/cases/${encodeURIComponent(caseId)}/what-if`, { inputs });
}

export function postContest(
  caseId: string,
  features: Record<string, number>,
  proof: string,
): Promise<ContestResponse> {
  return post(`/cases/${encodeURIComponent(caseId)}/contest`, { features, proof });
}
