//! HTTP surface. Every response body is JSON except redirects.

mod admin;
mod portal;

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::body::HttpBody;
use axum::extract::{ConnectInfo, FromRequestParts, Request, State};
use axum::http::header::{AUTHORIZATION, CONTENT_LENGTH, COOKIE, LOCATION, SET_COOKIE};
use axum::http::request::Parts;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use chrono::Duration;
use mylibrary_core::clf::LogEntry;
use mylibrary_core::model::User;
use serde_json::json;

use crate::app::App;
use crate::auth::Session;
use crate::error::Error;

pub const SESSION_COOKIE: &str = "mylib_session";
pub const ADMIN_COOKIE: &str = "mylib_admin";

#[derive(Clone)]
pub struct Shared {
    pub app: Arc<App>,
    log: Option<Arc<Mutex<File>>>,
}

impl Shared {
    pub fn new(app: Arc<App>) -> std::io::Result<Self> {
        let log = match &app.settings.access_log {
            Some(path) => Some(Arc::new(Mutex::new(open_log(path)?))),
            None => None,
        };
        Ok(Self { app, log })
    }
}

fn open_log(path: &Path) -> std::io::Result<File> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    OpenOptions::new().create(true).append(true).open(path)
}

pub fn router(shared: Shared) -> Router {
    Router::new()
        .merge(portal::routes())
        .nest("/admin", admin::routes())
        .layer(middleware::from_fn_with_state(shared.clone(), access_log))
        .with_state(shared)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    shared: Shared,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(
        listener,
        router(shared).into_make_service_with_connect_info::<SocketAddr>(),
    )
    .with_graceful_shutdown(shutdown)
    .await
}

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let message = e.to_string();
        let (status, body) = match &e {
            Error::NotFound(_) => (StatusCode::NOT_FOUND, json!({"error": "not_found", "message": message})),
            Error::Conflict(_) => (StatusCode::CONFLICT, json!({"error": "conflict", "message": message})),
            Error::InvalidArgument(_) => (
                StatusCode::BAD_REQUEST,
                json!({"error": "invalid_argument", "message": message}),
            ),
            Error::Validation(v) => (
                StatusCode::BAD_REQUEST,
                json!({"error": "validation", "message": message, "violations": v}),
            ),
            Error::Forbidden => (StatusCode::FORBIDDEN, json!({"error": "forbidden", "message": message})),
            Error::AuthenticationFailed => (
                StatusCode::UNAUTHORIZED,
                json!({"error": "authentication_failed", "message": message}),
            ),
            Error::Referenced { users, librarians } => (
                StatusCode::CONFLICT,
                json!({"error": "referenced", "message": message, "users": users, "librarians": librarians}),
            ),
            Error::Busy => (StatusCode::CONFLICT, json!({"error": "busy", "message": message})),
            Error::Transport(_) => (StatusCode::BAD_GATEWAY, json!({"error": "transport", "message": message})),
            Error::Storage(_) | Error::Io(_) => {
                tracing::error!(error = %e, "internal error");
                (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "internal", "message": "internal error"}))
            }
        };
        (status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = std::result::Result<T, ApiError>;

pub fn cookie<'a>(headers: &'a HeaderMap, name: &str) -> Option<&'a str> {
    headers
        .get_all(COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(';'))
        .filter_map(|pair| pair.trim().split_once('='))
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v)
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

pub fn set_cookie(name: &str, value: &str, max_age: Duration, secure: bool) -> HeaderValue {
    let mut text = format!(
        "{name}={value}; Path=/; HttpOnly; SameSite=Lax; Max-Age={}",
        max_age.num_seconds().max(0)
    );
    if secure {
        text.push_str("; Secure");
    }
    HeaderValue::from_str(&text).expect("cookie text is ASCII")
}

pub fn clear_cookie(name: &str, secure: bool) -> HeaderValue {
    set_cookie(name, "", Duration::zero(), secure)
}

pub fn redirect(location: &str) -> Response {
    let mut response = (
        StatusCode::FOUND,
        Json(json!({"error": "authentication_required", "redirect": location})),
    )
        .into_response();
    if let Ok(v) = HeaderValue::from_str(location) {
        response.headers_mut().insert(LOCATION, v);
    }
    response
}

/// A logged-in portal user. Rejects with the login redirect.
pub struct UserSession {
    pub session: Session<mylibrary_core::model::UserId>,
    pub user: User,
}

impl FromRequestParts<Shared> for UserSession {
    type Rejection = Response;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        match state.app.authenticate(cookie(&parts.headers, SESSION_COOKIE)) {
            Some((session, user)) => Ok(UserSession { session, user }),
            None => Err(redirect(&state.app.settings.login_url)),
        }
    }
}

/// A logged-in administrator, by cookie or bearer token.
pub struct AdminSession(pub Session<String>);

impl FromRequestParts<Shared> for AdminSession {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = bearer(&parts.headers).or_else(|| cookie(&parts.headers, ADMIN_COOKIE));
        state
            .app
            .admin_session(token)
            .map(AdminSession)
            .ok_or(ApiError(Error::AuthenticationFailed))
    }
}

/// Set by handlers that establish an identity the middleware could not see.
#[derive(Clone)]
pub struct AuthUser(pub String);

async fn access_log(State(shared): State<Shared>, request: Request, next: Next) -> Response {
    let host = request
        .extensions()
        .get::<ConnectInfo<SocketAddr>>()
        .map(|c| c.0.ip().to_string())
        .unwrap_or_else(|| "-".into());
    let method = request.method().to_string();
    let target = request
        .uri()
        .path_and_query()
        .map(|p| p.as_str().to_string())
        .unwrap_or_else(|| "/".into());
    let protocol = format!("{:?}", request.version());
    let token = cookie(request.headers(), SESSION_COOKIE).map(str::to_string);
    let session = token.as_deref().and_then(|t| shared.app.authenticate(Some(t)));
    let timestamp = shared.app.local_now();

    let mut response = next.run(request).await;

    // Keep the browser's copy of a sliding session alive.
    if let Some((s, _)) = &session {
        if !response.headers().contains_key(SET_COOKIE) {
            let header = set_cookie(
                SESSION_COOKIE,
                &s.token,
                shared.app.sessions.lifetime(),
                shared.app.settings.secure_cookies,
            );
            response.headers_mut().insert(SET_COOKIE, header);
        }
    }

    if let Some(log) = &shared.log {
        let authuser = response
            .extensions()
            .get::<AuthUser>()
            .map(|a| a.0.clone())
            .or_else(|| session.map(|(_, u)| u.auth_id));
        let bytes = response
            .headers()
            .get(CONTENT_LENGTH)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse().ok())
            .or_else(|| HttpBody::size_hint(response.body()).exact());
        let entry = LogEntry {
            host,
            ident: None,
            authuser,
            timestamp,
            method,
            target,
            protocol,
            status: response.status().as_u16(),
            bytes: bytes.filter(|b| *b > 0),
        };
        let mut file = log.lock().unwrap();
        if let Err(e) = writeln!(file, "{entry}") {
            tracing::warn!(error = %e, "access log write failed");
        }
    }
    response
}

pub(crate) fn no_content() -> Response {
    StatusCode::NO_CONTENT.into_response()
}
