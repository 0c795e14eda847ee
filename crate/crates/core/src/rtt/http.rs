use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{RttError, Translator};

/// Settings for one remote MT service.
#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Base URL, e.g. "http://mt.example.com:8080".
    pub endpoint: String,
    /// Request path appended to the endpoint.
    pub path: String,
    /// Cache identity of the remote system.
    pub system_id: String,
    /// Name of the environment variable holding the auth token; sent as a
    /// bearer Authorization header when the variable is set.
    pub auth_env: Option<String>,
    pub timeout: Duration,
    /// Transport retries after the first attempt. Semantic (non-2xx)
    /// responses are never retried.
    pub retries: u32,
    /// First backoff delay; doubles per retry.
    pub backoff: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            path: "/translate".to_string(),
            system_id: "http".to_string(),
            auth_env: None,
            timeout: Duration::from_secs(30),
            retries: 3,
            backoff: Duration::from_millis(250),
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    source_lang: &'a str,
    target_lang: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct WireResponse {
    translations: Vec<String>,
}

/// Adapter for services speaking the plain JSON batch contract:
/// POST {path} {"source_lang", "target_lang", "texts"} and a
/// {"translations"} reply of equal length.
pub struct HttpTranslator {
    config: HttpConfig,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpTranslator {
    pub fn new(config: HttpConfig) -> Result<HttpTranslator, RttError> {
        if config.endpoint.is_empty() {
            return Err(RttError::AdapterConfig("endpoint is empty".to_string()));
        }
        let token = config
            .auth_env
            .as_deref()
            .and_then(|name| std::env::var(name).ok())
            .filter(|t| !t.is_empty());
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| RttError::AdapterConfig(e.to_string()))?;
        Ok(HttpTranslator { config, token, client })
    }

    fn url(&self) -> String {
        format!(
            "{}/{}",
            self.config.endpoint.trim_end_matches('/'),
            self.config.path.trim_start_matches('/')
        )
    }
}

impl Translator for HttpTranslator {
    fn system_id(&self) -> &str {
        &self.config.system_id
    }

    fn translate_batch(
        &self,
        texts: &[String],
        src_lang: &str,
        tgt_lang: &str,
    ) -> Result<Vec<String>, RttError> {
        let request = WireRequest { source_lang: src_lang, target_lang: tgt_lang, texts };
        let mut attempts = 0;
        loop {
            attempts += 1;
            let mut builder = self.client.post(self.url()).json(&request);
            if let Some(token) = &self.token {
                builder = builder.bearer_auth(token);
            }
            match builder.send() {
                Err(err) => {
                    if attempts <= self.config.retries {
                        let exp = attempts.min(16) - 1;
                        std::thread::sleep(self.config.backoff * 2u32.pow(exp));
                        continue;
                    }
                    return Err(RttError::Transport { attempts, detail: err.to_string() });
                }
                Ok(response) => {
                    let status = response.status();
                    if !status.is_success() {
                        let body = response.text().unwrap_or_default();
                        let detail: String = body.chars().take(200).collect();
                        return Err(RttError::Service { status: status.as_u16(), detail });
                    }
                    let parsed: WireResponse = response
                        .json()
                        .map_err(|e| RttError::Response(e.to_string()))?;
                    if parsed.translations.len() != texts.len() {
                        return Err(RttError::Response(format!(
                            "expected {} translations, got {}",
                            texts.len(),
                            parsed.translations.len()
                        )));
                    }
                    return Ok(parsed.translations);
                }
            }
        }
    }
}
