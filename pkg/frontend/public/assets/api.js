/** Typed client for the study service JSON API.
 *
 * Mutations that may be retried carry enough context for the service to
 * absorb duplicate deliveries: choices send their comparison index and the
 * satisfaction label is idempotent, so a network failure is always safe to
 * retry without double-counting a vote.
 */
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.status = status;
    }
}
const RETRIES = 3;
async function request(method, url, body, retries = RETRIES) {
    let lastFailure;
    for (let attempt = 0; attempt <= retries; attempt++) {
        let response;
        try {
            response = await fetch(url, {
                method,
                headers: body === undefined ? undefined : { "Content-Type": "application/json" },
                body: body === undefined ? undefined : JSON.stringify(body),
            });
        }
        catch (err) {
            lastFailure = err; // network failure: retry, the API absorbs duplicates
            continue;
        }
        if (!response.ok) {
            const text = await response.text();
            throw new ApiError(response.status, text || response.statusText);
        }
        return (await response.json());
    }
    throw lastFailure instanceof Error ? lastFailure : new Error(String(lastFailure));
}
export class StudyApi {
    constructor(base = "") {
        this.base = base;
    }
    url(path) {
        return this.base + path;
    }
    startTournament(imageId, raterId) {
        return request("POST", this.url("/tournaments"), {
            image_id: imageId,
            rater_id: raterId,
        });
    }
    getTournament(tournamentId) {
        return request("GET", this.url(`/tournaments/${tournamentId}`));
    }
    submitChoice(tournamentId, candidateId, comparisonIndex) {
        return request("POST", this.url(`/tournaments/${tournamentId}/choice`), {
            candidate_id: candidateId,
            comparison_index: comparisonIndex,
        });
    }
    submitSatisfaction(tournamentId, label) {
        return request("POST", this.url(`/tournaments/${tournamentId}/satisfaction`), {
            label,
        });
    }
    submitMos(imageId, raterId, method, score) {
        return request("POST", this.url("/mos"), {
            image_id: imageId,
            rater_id: raterId,
            method,
            score,
        });
    }
    listCandidates(imageId) {
        return request("GET", this.url(`/images/${imageId}/candidates`));
    }
}
