//! Fires the weekly digest run from inside the server process.

use std::sync::Arc;

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveTime, Utc, Weekday};

use crate::app::App;
use crate::config::WeeklyConfig;

/// First instant strictly after `now` that falls on `weekday` at `hour`:00
/// local time.
pub fn next_run(now: DateTime<Utc>, offset: FixedOffset, weekday: Weekday, hour: u32) -> DateTime<Utc> {
    let local = now.with_timezone(&offset);
    let at = NaiveTime::from_hms_opt(hour, 0, 0).expect("hour checked by config");
    let days_ahead = (7 + weekday.num_days_from_monday() as i64
        - local.weekday().num_days_from_monday() as i64)
        % 7;
    let mut candidate = (local.date_naive() + Duration::days(days_ahead))
        .and_time(at)
        .and_local_timezone(offset)
        .single()
        .expect("fixed offsets are unambiguous")
        .to_utc();
    if candidate <= now {
        candidate += Duration::weeks(1);
    }
    candidate
}

async fn run_once(app: &Arc<App>) {
    let app = Arc::clone(app);
    match tokio::task::spawn_blocking(move || app.weekly_run()).await {
        Ok(Ok(report)) => tracing::info!(
            week = %report.week,
            sent = report.emails_sent,
            suppressed = report.emails_suppressed,
            "weekly run"
        ),
        Ok(Err(e)) => tracing::warn!(error = %e, "weekly run failed"),
        Err(e) => tracing::error!(error = %e, "weekly run panicked"),
    }
}

/// Runs once at startup to catch up on a missed week (the run is
/// idempotent), then on every scheduled tick.
pub async fn weekly_loop(app: Arc<App>, config: WeeklyConfig) {
    run_once(&app).await;
    loop {
        let now = app.now();
        let next = next_run(now, app.settings.utc_offset, config.weekday, config.hour);
        let wait = (next - now).to_std().unwrap_or_default();
        tokio::time::sleep(wait).await;
        run_once(&app).await;
    }
}
