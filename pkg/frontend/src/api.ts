/** Typed client for the retrieval service JSON API. */

export interface CategoryInfo {
  code: number;
  name: string;
}

export interface QueryResultPayload {
  image_id: number;
  color_sim: number;
  texture_sim: number;
  score: number;
  rank: number;
  url: string;
}

export interface QueryResponse {
  query_id: number;
  predicted_category: string;
  predicted_code: number;
  comparisons: number;
  results: QueryResultPayload[];
}

export interface FeedbackResponse {
  reassigned: boolean;
  new_category: string | null;
}

export interface SearchHit {
  image_id: number;
  category: string | null;
  keywords: string[];
  url: string;
}

export interface SearchResponse {
  results: SearchHit[];
}

export interface HealthInfo {
  status: string;
  records: number;
  trained: boolean;
  normalization_fitted: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function toError(response: Response): Promise<ApiError> {
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, detail);
}

export class CbirClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) {
      throw await toError(response);
    }
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await toError(response);
    }
    return (await response.json()) as T;
  }

  async health(): Promise<HealthInfo> {
    return this.getJson<HealthInfo>("/healthz");
  }

  async categories(): Promise<CategoryInfo[]> {
    return this.getJson<CategoryInfo[]>("/categories");
  }

  /** Upload a query image as multipart form data. */
  async query(
    file: Blob,
    topK: number,
    threshold: number,
    filename = "query.bin",
  ): Promise<QueryResponse> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("top_k", String(topK));
    form.append("threshold", String(threshold));
    const response = await this.fetchFn(this.baseUrl + "/query", {
      method: "POST",
      body: form,
    });
    if (!response.ok) {
      throw await toError(response);
    }
    return (await response.json()) as QueryResponse;
  }

  async feedback(
    queryId: number,
    imageId: number,
    polarity: "positive" | "negative",
  ): Promise<FeedbackResponse> {
    return this.postJson<FeedbackResponse>("/feedback", {
      query_id: queryId,
      image_id: imageId,
      polarity,
    });
  }

  async search(keywords: string): Promise<SearchHit[]> {
    const query = encodeURIComponent(keywords);
    const body = await this.getJson<SearchResponse>(`/search?keywords=${query}`);
    return body.results;
  }

  imageUrl(imageId: number): string {
    return `${this.baseUrl}/images/${imageId}`;
  }
}
