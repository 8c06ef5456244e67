//! Language-model backends: an OpenAI-compatible HTTP client, a replaying
//! mock keyed by request hash, a local hashing embedder and an embedding cache.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::GroundingError;

pub trait ChatBackend: Send + Sync {
    /// Completion text for a single-turn prompt.
    fn complete(&self, prompt: &str) -> Result<String, GroundingError>;
}

pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, GroundingError>;

    /// Distinguishes cache entries of different models.
    fn model_id(&self) -> &str;
}

fn backend_err(msg: impl Into<String>) -> GroundingError {
    GroundingError::Backend(msg.into())
}

pub fn request_hash(kind: &str, model: &str, payload: &str) -> String {
    let mut h = Sha256::new();
    for part in [kind, model, payload] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `https://api.openai.com/v1`.
    pub chat_url: String,
    pub chat_model: String,
    /// Name of a shipped prompt template or a path to one.
    #[serde(default = "default_template")]
    pub prompt_template: String,
    pub embed_url: String,
    pub embed_model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
    /// Environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
}

fn default_template() -> String {
    "lifted_translation".into()
}
fn default_timeout() -> u64 {
    60
}
fn default_in_flight() -> usize {
    4
}
fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        let text = std::fs::read_to_string(path).map_err(|e| GroundingError::Io(format!("{}: {e}", path.display())))?;
        let cfg: BackendConfig = serde_json::from_str(&text).map_err(|e| GroundingError::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GroundingError> {
        if self.timeout_secs == 0 {
            return Err(GroundingError::Format("timeout_secs must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(GroundingError::Format("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate { free: Mutex::new(n), cv: Condvar::new() }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut free = self.free.lock().expect("gate poisoned");
            while *free == 0 {
                free = self.cv.wait(free).expect("gate poisoned");
            }
            *free -= 1;
        }
        let out = f();
        *self.free.lock().expect("gate poisoned") += 1;
        self.cv.notify_one();
        out
    }
}

pub struct HttpBackend {
    cfg: BackendConfig,
    client: reqwest::blocking::Client,
    token: Option<String>,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(cfg: BackendConfig) -> Result<Self, GroundingError> {
        cfg.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| backend_err(e.to_string()))?;
        let token = std::env::var(&cfg.api_key_env).ok();
        let gate = Gate::new(cfg.max_in_flight);
        Ok(HttpBackend { cfg, client, token, gate })
    }

    fn post(&self, url: &str, body: &Value) -> Result<Value, GroundingError> {
        self.gate.run(|| {
            let mut req = self.client.post(url).json(body);
            if let Some(t) = &self.token {
                req = req.bearer_auth(t);
            }
            let resp = req.send().map_err(|e| backend_err(format!("{url}: {e}")))?;
            let status = resp.status();
            if !status.is_success() {
                let text = resp.text().unwrap_or_default();
                return Err(backend_err(format!("{url}: HTTP {status}: {text}")));
            }
            resp.json::<Value>().map_err(|e| backend_err(format!("{url}: {e}")))
        })
    }
}

fn endpoint(base: &str, path: &str) -> String {
    format!("{}/{path}", base.trim_end_matches('/'))
}

impl ChatBackend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<String, GroundingError> {
        let body = json!({
            "model": self.cfg.chat_model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        });
        let v = self.post(&endpoint(&self.cfg.chat_url, "chat/completions"), &body)?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| backend_err("chat response without choices[0].message.content"))
    }
}

impl Embedder for HttpBackend {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, GroundingError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = json!({"model": self.cfg.embed_model, "input": texts});
        let v = self.post(&endpoint(&self.cfg.embed_url, "embeddings"), &body)?;
        let data = v.get("data").and_then(Value::as_array).ok_or_else(|| backend_err("embedding response without data"))?;
        let mut out = vec![Vec::new(); texts.len()];
        for (pos, item) in data.iter().enumerate() {
            let i = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
            let vec = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| backend_err("embedding item without vector"))?
                .iter()
                .map(|x| x.as_f64().map(|x| x as f32))
                .collect::<Option<Vec<f32>>>()
                .ok_or_else(|| backend_err("non-numeric embedding"))?;
            *out.get_mut(i).ok_or_else(|| backend_err("embedding index out of range"))? = vec;
        }
        if out.iter().any(Vec::is_empty) {
            return Err(backend_err("embedding response is missing inputs"));
        }
        Ok(out)
    }

    fn model_id(&self) -> &str {
        &self.cfg.embed_model
    }
}

/// Recorded responses keyed by [`request_hash`]: chat responses are strings,
/// embeddings are number arrays.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(default = "mock_model")]
    pub model: String,
    pub responses: BTreeMap<String, Value>,
}

fn mock_model() -> String {
    "mock".into()
}

impl Fixture {
    pub fn new(model: &str) -> Self {
        Fixture { model: model.to_string(), responses: BTreeMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        let text = std::fs::read_to_string(path).map_err(|e| GroundingError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| GroundingError::Format(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), GroundingError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| GroundingError::Format(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| GroundingError::Io(format!("{}: {e}", path.display())))
    }

    pub fn insert_chat(&mut self, prompt: &str, response: &str) {
        self.responses.insert(request_hash("chat", &self.model, prompt), Value::String(response.to_string()));
    }

    pub fn insert_embedding(&mut self, text: &str, v: &[f32]) {
        self.responses.insert(request_hash("embed", &self.model, text), json!(v));
    }
}

/// Replays a [`Fixture`]; any request not in it is an error, so a mock run
/// never falls through to the network.
pub struct MockBackend {
    fixture: Fixture,
}

impl MockBackend {
    pub fn new(fixture: Fixture) -> Self {
        MockBackend { fixture }
    }

    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        Ok(Self::new(Fixture::load(path)?))
    }

    fn lookup(&self, kind: &str, payload: &str) -> Result<&Value, GroundingError> {
        let h = request_hash(kind, &self.fixture.model, payload);
        self.fixture.responses.get(&h).ok_or_else(|| GroundingError::MockMiss { kind: kind.to_string(), hash: h })
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, prompt: &str) -> Result<String, GroundingError> {
        self.lookup("chat", prompt)?.as_str().map(str::to_string).ok_or_else(|| backend_err("fixture chat entry is not a string"))
    }
}

impl Embedder for MockBackend {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, GroundingError> {
        texts
            .iter()
            .map(|t| {
                serde_json::from_value::<Vec<f32>>(self.lookup("embed", t)?.clone())
                    .map_err(|_| backend_err("fixture embedding entry is not a number array"))
            })
            .collect()
    }

    fn model_id(&self) -> &str {
        &self.fixture.model
    }
}

/// Signed feature hashing of lowercase words and their character trigrams.
/// Needs no model, so it is the default embedder for offline runs.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    pub dims: usize,
    id: String,
}

impl HashingEmbedder {
    pub fn new(dims: usize) -> Self {
        assert!(dims > 0);
        HashingEmbedder { dims, id: format!("hashing-{dims}") }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dims];
        let lower = text.to_lowercase();
        for word in lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
            self.add(&mut v, &format!("w:{word}"), 1.0);
            let padded: Vec<char> = format!("#{word}#").chars().collect();
            for tri in padded.windows(3) {
                self.add(&mut v, &format!("t:{}", tri.iter().collect::<String>()), 0.5);
            }
        }
        v
    }

    fn add(&self, v: &mut [f32], feature: &str, weight: f32) {
        let h = Sha256::digest(feature.as_bytes());
        let x = u64::from_le_bytes(h[..8].try_into().expect("digest is 32 bytes"));
        let sign = if x >> 63 == 1 { -1.0 } else { 1.0 };
        v[(x % self.dims as u64) as usize] += sign * weight;
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder::new(256)
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, GroundingError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }

    fn model_id(&self) -> &str {
        &self.id
    }
}

/// Memoizes another embedder by content hash; optionally persisted as JSON.
pub struct CachedEmbedder<E> {
    inner: E,
    cache: RwLock<HashMap<String, Vec<f32>>>,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn new(inner: E) -> Self {
        CachedEmbedder { inner, cache: RwLock::new(HashMap::new()) }
    }

    pub fn with_file(inner: E, path: &Path) -> Result<Self, GroundingError> {
        let me = Self::new(inner);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| GroundingError::Io(e.to_string()))?;
            let m: HashMap<String, Vec<f32>> = serde_json::from_str(&text).map_err(|e| GroundingError::Format(e.to_string()))?;
            *me.cache.write().expect("cache poisoned") = m;
        }
        Ok(me)
    }

    pub fn save(&self, path: &Path) -> Result<(), GroundingError> {
        let m = self.cache.read().expect("cache poisoned");
        let sorted: BTreeMap<&String, &Vec<f32>> = m.iter().collect();
        let text = serde_json::to_string(&sorted).map_err(|e| GroundingError::Format(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| GroundingError::Io(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, GroundingError> {
        let keys: Vec<String> = texts.iter().map(|t| request_hash("embed", self.inner.model_id(), t)).collect();
        let missing: Vec<String> = {
            let cache = self.cache.read().expect("cache poisoned");
            let mut seen = std::collections::HashSet::new();
            texts.iter().zip(&keys).filter(|(_, k)| !cache.contains_key(*k) && seen.insert(*k)).map(|(t, _)| t.clone()).collect()
        };
        if !missing.is_empty() {
            let fresh = self.inner.embed(&missing)?;
            let mut cache = self.cache.write().expect("cache poisoned");
            for (t, v) in missing.iter().zip(fresh) {
                cache.insert(request_hash("embed", self.inner.model_id(), t), v);
            }
        }
        let cache = self.cache.read().expect("cache poisoned");
        Ok(keys.iter().map(|k| cache[k].clone()).collect())
    }

    fn model_id(&self) -> &str {
        self.inner.model_id()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_replays_and_misses() {
        let mut fx = Fixture::new("m");
        fx.insert_chat("hello", "world");
        fx.insert_embedding("x", &[1.0, 0.5]);
        let m = MockBackend::new(fx);
        assert_eq!(m.complete("hello").unwrap(), "world");
        assert_eq!(m.embed(&["x".to_string()]).unwrap(), vec![vec![1.0, 0.5]]);
        assert!(matches!(m.complete("other"), Err(GroundingError::MockMiss { .. })));
    }

    #[test]
    fn hashing_embedder_is_deterministic() {
        let e = HashingEmbedder::default();
        assert_eq!(e.embed_one("Main Street"), e.embed_one("main street"));
        assert!(e.embed_one("").iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cache_counts_distinct_texts() {
        let c = CachedEmbedder::new(HashingEmbedder::new(16));
        let texts = vec!["a b".to_string(), "a b".to_string(), "c".to_string()];
        let out = c.embed(&texts).unwrap();
        assert_eq!(out[0], out[1]);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn config_validation() {
        let cfg: BackendConfig = serde_json::from_str(
            r#"{"chat_url": "http://localhost:1", "chat_model": "m", "embed_url": "http://localhost:1", "embed_model": "e", "max_in_flight": 0}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }
}
