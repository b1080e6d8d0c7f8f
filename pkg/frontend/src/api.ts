/** Typed client for the study service JSON API.
 *
 * Mutations that may be retried carry enough context for the service to
 * absorb duplicate deliveries: choices send their comparison index and the
 * satisfaction label is idempotent, so a network failure is always safe to
 * retry without double-counting a vote.
 */

export interface TournamentView {
  tournament_id: string;
  image_id: string;
  rater_id: string;
  pair: [string, string] | null;
  pair_urls: [string, string] | null;
  raw_url: string;
  comparisons_done: number;
  comparisons_total: number;
  final_pick: string | null;
  needs_satisfaction: boolean;
  satisfaction: string | null;
}

export interface CandidateInfo {
  candidate_id: string;
  method: string;
  url: string;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

const RETRIES = 3;

async function request<T>(
  method: string,
  url: string,
  body?: unknown,
  retries = RETRIES,
): Promise<T> {
  let lastFailure: unknown;
  for (let attempt = 0; attempt <= retries; attempt++) {
    let response: Response;
    try {
      response = await fetch(url, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      lastFailure = err; // network failure: retry, the API absorbs duplicates
      continue;
    }
    if (!response.ok) {
      const text = await response.text();
      throw new ApiError(response.status, text || response.statusText);
    }
    return (await response.json()) as T;
  }
  throw lastFailure instanceof Error ? lastFailure : new Error(String(lastFailure));
}

export class StudyApi {
  constructor(private base = "") {}

  url(path: string): string {
    return this.base + path;
  }

  startTournament(imageId: string, raterId: string): Promise<TournamentView> {
    return request("POST", this.url("/tournaments"), {
      image_id: imageId,
      rater_id: raterId,
    });
  }

  getTournament(tournamentId: string): Promise<TournamentView> {
    return request("GET", this.url(`/tournaments/${tournamentId}`));
  }

  submitChoice(
    tournamentId: string,
    candidateId: string,
    comparisonIndex: number,
  ): Promise<TournamentView> {
    return request("POST", this.url(`/tournaments/${tournamentId}/choice`), {
      candidate_id: candidateId,
      comparison_index: comparisonIndex,
    });
  }

  submitSatisfaction(tournamentId: string, label: string): Promise<TournamentView> {
    return request("POST", this.url(`/tournaments/${tournamentId}/satisfaction`), {
      label,
    });
  }

  submitMos(
    imageId: string,
    raterId: string,
    method: string,
    score: number,
  ): Promise<{ stored: boolean }> {
    return request("POST", this.url("/mos"), {
      image_id: imageId,
      rater_id: raterId,
      method,
      score,
    });
  }

  listCandidates(imageId: string): Promise<CandidateInfo[]> {
    return request("GET", this.url(`/images/${imageId}/candidates`));
  }
}
