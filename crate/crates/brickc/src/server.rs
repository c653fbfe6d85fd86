use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde_json::Value;
use tokio::net::TcpListener;

use crate::api::{self, ApiError};

pub const DEFAULT_PORT: u16 = 7878;

pub fn router() -> Router {
    Router::new()
        .route("/v1/check", post(|body: Bytes| handle(body, |doc, _| api::check(doc))))
        .route(
            "/v1/compile",
            post(|body: Bytes| handle(body, |doc, opts| api::compile(doc, &api::parse_options(opts)?))),
        )
        .route(
            "/v1/normalize",
            post(|body: Bytes| handle(body, |doc, opts| api::normalize(doc, &api::parse_options(opts)?))),
        )
        .route(
            "/v1/render",
            post(|body: Bytes| handle(body, |doc, opts| api::render(doc, &api::parse_options(opts)?))),
        )
        .route(
            "/v1/proof",
            post(|body: Bytes| handle(body, |doc, opts| api::proof(doc, &api::parse_options(opts)?))),
        )
}

pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

type Op = fn(&brickc_core::il::IlDocument, &Value) -> Result<Value, ApiError>;

async fn handle(body: Bytes, op: Op) -> Response {
    let result = tokio::task::spawn_blocking(move || {
        let text = std::str::from_utf8(&body).map_err(|e| ApiError {
            code: "syntax-error".into(),
            message: format!("request body is not UTF-8: {e}"),
            path: Some(format!("@{}", e.valid_up_to())),
            malformed: true,
        })?;
        let (doc, opts) = api::parse_request(text)?;
        op(&doc, &opts)
    })
    .await;
    let (status, value) = match result {
        Ok(Ok(v)) => (StatusCode::OK, v),
        Ok(Err(e)) if e.malformed => (StatusCode::BAD_REQUEST, e.to_json()),
        Ok(Err(e)) => (StatusCode::UNPROCESSABLE_ENTITY, e.to_json()),
        Err(join) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            ApiError {
                code: "internal".into(),
                message: join.to_string(),
                path: None,
                malformed: false,
            }
            .to_json(),
        ),
    };
    (status, [(header::CONTENT_TYPE, "application/json")], api::to_body(&value)).into_response()
}
