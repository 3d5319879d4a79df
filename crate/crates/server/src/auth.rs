//! Identity assertions, session tokens and admin password verifiers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use base64::engine::general_purpose::{STANDARD_NO_PAD, URL_SAFE_NO_PAD};
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use hmac::{Hmac, Mac};
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use subtle::ConstantTimeEq;

use crate::error::{Error, Result};

const MAX_AUTH_ID_LEN: usize = 256;

/// Who the external authenticator says the caller is.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    #[serde(rename = "sub")]
    pub auth_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
}

pub trait Authenticator: Send + Sync {
    fn verify(&self, assertion: &str, now: DateTime<Utc>) -> Result<Identity>;
}

fn check_auth_id(auth_id: &str) -> Result<()> {
    let ok = !auth_id.is_empty()
        && auth_id.len() <= MAX_AUTH_ID_LEN
        && !auth_id.chars().any(|c| c.is_whitespace() || c.is_control());
    if ok {
        Ok(())
    } else {
        Err(Error::AuthenticationFailed)
    }
}

/// Accepts the assertion itself as the auth id. For demos and tests only.
#[derive(Debug, Default, Clone, Copy)]
pub struct StubAuthenticator;

impl Authenticator for StubAuthenticator {
    fn verify(&self, assertion: &str, _now: DateTime<Utc>) -> Result<Identity> {
        check_auth_id(assertion)?;
        Ok(Identity {
            auth_id: assertion.to_string(),
            ..Identity::default()
        })
    }
}

type HmacSha256 = Hmac<Sha256>;

#[derive(Serialize, Deserialize)]
struct SignedPayload {
    #[serde(flatten)]
    identity: Identity,
    exp: i64,
}

/// Verifies `base64url(payload) "." hex(hmac_sha256(secret, base64url(payload)))`
/// where the payload is `{"sub": .., "name": .., "email": .., "exp": unix_seconds}`.
/// This is what the external login service hands back on redirect.
#[derive(Clone)]
pub struct SignedAuthenticator {
    secret: Vec<u8>,
}

impl SignedAuthenticator {
    pub fn new(secret: impl Into<Vec<u8>>) -> Self {
        Self {
            secret: secret.into(),
        }
    }

    fn mac(&self, data: &[u8]) -> HmacSha256 {
        let mut mac = HmacSha256::new_from_slice(&self.secret).expect("hmac accepts any key length");
        mac.update(data);
        mac
    }

    pub fn sign(&self, identity: &Identity, expires: DateTime<Utc>) -> String {
        let payload = SignedPayload {
            identity: identity.clone(),
            exp: expires.timestamp(),
        };
        let encoded = URL_SAFE_NO_PAD.encode(serde_json::to_vec(&payload).expect("payload serializes"));
        let tag = self.mac(encoded.as_bytes()).finalize().into_bytes();
        format!("{encoded}.{}", hex(&tag))
    }
}

impl Authenticator for SignedAuthenticator {
    fn verify(&self, assertion: &str, now: DateTime<Utc>) -> Result<Identity> {
        let (encoded, tag) = assertion.split_once('.').ok_or(Error::AuthenticationFailed)?;
        let tag = unhex(tag).ok_or(Error::AuthenticationFailed)?;
        self.mac(encoded.as_bytes())
            .verify_slice(&tag)
            .map_err(|_| Error::AuthenticationFailed)?;
        let bytes = URL_SAFE_NO_PAD
            .decode(encoded)
            .map_err(|_| Error::AuthenticationFailed)?;
        let payload: SignedPayload =
            serde_json::from_slice(&bytes).map_err(|_| Error::AuthenticationFailed)?;
        if payload.exp <= now.timestamp() {
            return Err(Error::AuthenticationFailed);
        }
        check_auth_id(&payload.identity.auth_id)?;
        Ok(payload.identity)
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn unhex(text: &str) -> Option<Vec<u8>> {
    if !text.len().is_multiple_of(2) || !text.is_ascii() {
        return None;
    }
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&text[i..i + 2], 16).ok())
        .collect()
}

/// 128 random bits from the OS, hex encoded.
pub fn new_token() -> String {
    let mut bytes = [0u8; 16];
    OsRng.fill_bytes(&mut bytes);
    hex(&bytes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session<T> {
    pub token: String,
    pub subject: T,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

/// Server-side token table. With `sliding`, each successful resolve pushes
/// the expiry out by the full lifetime again.
pub struct SessionTable<T> {
    lifetime: Duration,
    sliding: bool,
    sessions: Mutex<HashMap<String, Session<T>>>,
}

impl<T: Clone> SessionTable<T> {
    pub fn new(lifetime: Duration, sliding: bool) -> Self {
        Self {
            lifetime,
            sliding,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn lifetime(&self) -> Duration {
        self.lifetime
    }

    pub fn issue(&self, subject: T, now: DateTime<Utc>) -> Session<T> {
        let session = Session {
            token: new_token(),
            subject,
            issued_at: now,
            expires_at: now + self.lifetime,
        };
        let mut map = self.sessions.lock().unwrap();
        map.retain(|_, s| s.expires_at > now);
        map.insert(session.token.clone(), session.clone());
        session
    }

    pub fn resolve(&self, token: &str, now: DateTime<Utc>) -> Option<Session<T>> {
        let mut map = self.sessions.lock().unwrap();
        let session = map.get_mut(token)?;
        if session.expires_at <= now {
            map.remove(token);
            return None;
        }
        if self.sliding {
            session.expires_at = now + self.lifetime;
        }
        Some(session.clone())
    }

    /// Idempotent; unknown tokens are ignored.
    pub fn revoke(&self, token: &str) {
        self.sessions.lock().unwrap().remove(token);
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub const DEFAULT_PBKDF2_ROUNDS: u32 = 100_000;
const SALT_LEN: usize = 16;
const HASH_LEN: usize = 32;

/// `pbkdf2-sha256$<rounds>$<salt b64>$<hash b64>`
pub fn hash_password(password: &str, rounds: u32) -> String {
    let mut salt = [0u8; SALT_LEN];
    OsRng.fill_bytes(&mut salt);
    let hash = derive(password, &salt, rounds);
    format!(
        "pbkdf2-sha256${rounds}${}${}",
        STANDARD_NO_PAD.encode(salt),
        STANDARD_NO_PAD.encode(hash)
    )
}

fn derive(password: &str, salt: &[u8], rounds: u32) -> [u8; HASH_LEN] {
    let mut out = [0u8; HASH_LEN];
    pbkdf2::pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, rounds, &mut out);
    out
}

struct Verifier {
    rounds: u32,
    salt: Vec<u8>,
    hash: Vec<u8>,
}

fn parse_verifier(text: &str) -> Option<Verifier> {
    let mut parts = text.split('$');
    if parts.next()? != "pbkdf2-sha256" {
        return None;
    }
    let rounds = parts.next()?.parse().ok().filter(|r| *r > 0)?;
    let salt = STANDARD_NO_PAD.decode(parts.next()?).ok()?;
    let hash = STANDARD_NO_PAD.decode(parts.next()?).ok()?;
    if parts.next().is_some() || hash.len() != HASH_LEN {
        return None;
    }
    Some(Verifier { rounds, salt, hash })
}

pub fn verify_password(password: &str, verifier: &str) -> bool {
    let Some(v) = parse_verifier(verifier) else {
        return false;
    };
    let candidate = derive(password, &v.salt, v.rounds);
    candidate.ct_eq(v.hash.as_slice()).into()
}

/// Burns the same work as a real check so unknown usernames cost the same.
pub fn verify_against_dummy(password: &str) {
    static DUMMY: OnceLock<String> = OnceLock::new();
    let verifier = DUMMY.get_or_init(|| hash_password("not a real password", DEFAULT_PBKDF2_ROUNDS));
    let _ = verify_password(password, verifier);
}
