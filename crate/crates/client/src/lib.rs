//! Async client for the curation service.

use reqwest::{Method, StatusCode, Url};
use rulelens_core::curation::{
    CurationStats, ItemPut, ItemView, RulePage, RulePatch, RuleQuery, RuleView, WeightsPut, WeightsView,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("invalid service URL: {0}")]
    Url(String),
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The edit was based on a stale version; reload and retry.
    #[error("version conflict on {key}: sent {expected}, current {current}")]
    Conflict { key: String, expected: u64, current: u64 },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("rejected ({status}): {message}")]
    Rejected { status: u16, message: String },
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Deserialize)]
struct ErrorBody {
    #[serde(default)]
    error: String,
    key: Option<String>,
    expected: Option<u64>,
    current: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportResponse {
    pub path: String,
    pub rules: usize,
    pub actionable: usize,
    pub removed: usize,
    pub unreviewed: usize,
}

#[derive(Debug, Clone)]
pub struct CurationClient {
    base: Url,
    http: reqwest::Client,
}

impl CurationClient {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Result<Self> {
        let mut base = Url::parse(base).map_err(|e| ClientError::Url(e.to_string()))?;
        if base.cannot_be_a_base() {
            return Err(ClientError::Url(format!("{base} cannot carry a path")));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(CurationClient { base, http: reqwest::Client::new() })
    }

    /// Builds `base/segments…`, percent-encoding each segment (rule and
    /// item ids contain `[`, `,`, `=` and non-ASCII arrows).
    fn url(&self, segments: &[&str]) -> Url {
        let mut url = self.base.clone();
        {
            let mut path = url.path_segments_mut().expect("checked in new");
            path.pop_if_empty();
            path.extend(segments);
        }
        url
    }

    async fn send<T: DeserializeOwned>(&self, request: reqwest::RequestBuilder) -> Result<T> {
        let response = request.send().await?;
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        let text = response.text().await.unwrap_or_default();
        let body: Option<ErrorBody> = serde_json::from_str(&text).ok();
        let message = body.as_ref().map_or(text.clone(), |b| b.error.clone());
        Err(match (status, body) {
            (
                StatusCode::CONFLICT,
                Some(ErrorBody { key: Some(key), expected: Some(expected), current: Some(current), .. }),
            ) => ClientError::Conflict { key, expected, current },
            (StatusCode::NOT_FOUND, _) => ClientError::NotFound(message),
            _ => ClientError::Rejected { status: status.as_u16(), message },
        })
    }

    fn request(&self, method: Method, segments: &[&str]) -> reqwest::RequestBuilder {
        self.http.request(method, self.url(segments))
    }

    pub async fn list_rules(&self, query: &RuleQuery) -> Result<RulePage> {
        self.send(self.request(Method::GET, &["rules"]).query(query)).await
    }

    /// Every rule matching `query`, walking all pages.
    pub async fn all_rules(&self, query: &RuleQuery) -> Result<Vec<RuleView>> {
        let mut out = Vec::new();
        let mut page = 1;
        loop {
            let q = RuleQuery { page: Some(page), ..query.clone() };
            let got = self.list_rules(&q).await?;
            let done = got.rules.is_empty() || page * got.per_page >= got.total;
            out.extend(got.rules);
            if done {
                return Ok(out);
            }
            page += 1;
        }
    }

    pub async fn rule(&self, id: &str) -> Result<RuleView> {
        self.send(self.request(Method::GET, &["rules", id])).await
    }

    pub async fn patch_rule(&self, id: &str, patch: &RulePatch) -> Result<RuleView> {
        self.send(self.request(Method::PATCH, &["rules", id]).json(patch)).await
    }

    pub async fn items(&self) -> Result<Vec<ItemView>> {
        self.send(self.request(Method::GET, &["items"])).await
    }

    pub async fn put_item(&self, item_id: &str, body: &ItemPut) -> Result<ItemView> {
        self.send(self.request(Method::PUT, &["items", item_id]).json(body)).await
    }

    pub async fn weights(&self) -> Result<WeightsView> {
        self.send(self.request(Method::GET, &["category-weights"])).await
    }

    pub async fn put_weights(&self, body: &WeightsPut) -> Result<WeightsView> {
        self.send(self.request(Method::PUT, &["category-weights"]).json(body)).await
    }

    pub async fn stats(&self) -> Result<CurationStats> {
        self.send(self.request(Method::GET, &["stats"])).await
    }

    pub async fn export(&self) -> Result<ExportResponse> {
        self.send(self.request(Method::POST, &["export"])).await
    }
}
