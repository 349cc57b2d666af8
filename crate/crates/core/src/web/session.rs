use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Form;
use maud::{html, Markup};
use serde::Deserialize;

use super::registry::RenderMode;
use super::render::{cookie, error_response, layout, see_other, Ctx, SESSION_COOKIE};
use crate::error::Error;

pub(super) async fn root(ctx: Ctx) -> Response {
    match &ctx.session {
        Some(s) => see_other(s.role().portal_route()),
        None => see_other("/login"),
    }
}

fn login_form(error: Option<&str>) -> Markup {
    html! {
        section .login.panel {
            @if let Some(e) = error { div .flash.error role="alert" { (e) } }
            form method="post" action="/login" {
                label { "Username" input name="username" autocomplete="username" required autofocus; }
                label { "Password" input name="password" type="password" autocomplete="current-password" required; }
                button type="submit" { "Sign in" }
            }
        }
    }
}

fn login_document(ctx: &Ctx, status: StatusCode, error: Option<&str>) -> Response {
    let body = layout("Sign in", None, &ctx.campus.perms, None, login_form(error));
    (status, [(header::CONTENT_TYPE, "text/html; charset=utf-8")], body.into_string()).into_response()
}

pub(super) async fn login_page(ctx: Ctx) -> Response {
    match &ctx.session {
        Some(s) => see_other(s.role().portal_route()),
        None => login_document(&ctx, StatusCode::OK, None),
    }
}

#[derive(Deserialize)]
pub(super) struct Credentials {
    username: String,
    password: String,
}

pub(super) async fn login(ctx: Ctx, Form(creds): Form<Credentials>) -> Response {
    let campus = ctx.campus.clone();
    let ttl_secs = campus.config().session_ttl_hours * 3600;
    let out = super::render::blocking(&campus, move |c| c.accounts().authenticate(&creds.username, &creds.password)).await;
    match out {
        Ok(session) => (
            StatusCode::SEE_OTHER,
            [
                (header::LOCATION, session.role().portal_route().to_string()),
                (
                    header::SET_COOKIE,
                    format!("{SESSION_COOKIE}={}; Path=/; HttpOnly; SameSite=Strict; Max-Age={ttl_secs}", session.token),
                ),
            ],
        )
            .into_response(),
        Err(Error::InvalidCredentials) => {
            login_document(&ctx, StatusCode::UNAUTHORIZED, Some("Unknown username or wrong password."))
        }
        Err(e) => error_response(&e, RenderMode::FullPage, None, &ctx.campus.perms),
    }
}

pub(super) async fn logout(ctx: Ctx, headers: HeaderMap) -> Response {
    if let Some(token) = cookie(&headers, SESSION_COOKIE).map(str::to_string) {
        if let Err(e) = super::render::blocking(&ctx.campus, move |c| c.accounts().logout(&token)).await {
            return error_response(&e, RenderMode::FullPage, None, &ctx.campus.perms);
        }
    }
    (
        StatusCode::SEE_OTHER,
        [
            (header::LOCATION, "/login".to_string()),
            (header::SET_COOKIE, format!("{SESSION_COOKIE}=; Path=/; HttpOnly; SameSite=Strict; Max-Age=0")),
        ],
    )
        .into_response()
}
