//! Service configuration, read from a TOML file.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! data_dir = "data"
//! utc_offset = "-05:00"
//! default_discipline = "General"
//! secure_cookies = false
//!
//! [auth]
//! mode = "stub"            # or "signed"
//! login_url = "https://login.example.edu/mylibrary"
//! secret = "..."           # signed mode only
//!
//! [mail]
//! transport = "spool"      # "stdout", "spool" or "smtp"
//! spool_dir = "data/spool"
//! smtp_host = "localhost"
//! smtp_port = 25
//! from_name = "MyLibrary"
//! from_address = "mylibrary@library.example.edu"
//!
//! [reference_contact]
//! name = "Reference Desk"
//! phone = "515-2936"
//! email = "reference@library.example.edu"
//! url = "https://library.example.edu/ask"
//!
//! [weekly]
//! enabled = true
//! weekday = "Mon"
//! hour = 6
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{FixedOffset, Weekday};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: String,
    pub data_dir: PathBuf,
    /// Offset used for ISO week boundaries and log timestamps.
    #[serde(with = "offset")]
    pub utc_offset: FixedOffset,
    /// Name of the discipline new accounts start in when none is given.
    pub default_discipline: Option<String>,
    pub secure_cookies: bool,
    pub auth: AuthConfig,
    pub mail: MailConfig,
    pub reference_contact: Contact,
    pub weekly: WeeklyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthMode {
    Stub,
    Signed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuthConfig {
    pub mode: AuthMode,
    pub login_url: String,
    pub secret: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    Stdout,
    Spool,
    Smtp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MailConfig {
    pub transport: TransportKind,
    pub spool_dir: Option<PathBuf>,
    pub smtp_host: String,
    pub smtp_port: u16,
    pub from_name: String,
    pub from_address: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Contact {
    pub name: String,
    pub phone: String,
    pub email: String,
    pub url: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeeklyConfig {
    pub enabled: bool,
    pub weekday: Weekday,
    pub hour: u32,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("data"),
            utc_offset: FixedOffset::east_opt(0).expect("zero offset"),
            default_discipline: None,
            secure_cookies: false,
            auth: AuthConfig::default(),
            mail: MailConfig::default(),
            reference_contact: Contact {
                name: "Reference Desk".into(),
                ..Contact::default()
            },
            weekly: WeeklyConfig::default(),
        }
    }
}

impl Default for AuthConfig {
    fn default() -> Self {
        Self {
            mode: AuthMode::Stub,
            login_url: "/login".into(),
            secret: None,
        }
    }
}

impl Default for MailConfig {
    fn default() -> Self {
        Self {
            transport: TransportKind::Stdout,
            spool_dir: None,
            smtp_host: "localhost".into(),
            smtp_port: 25,
            from_name: "MyLibrary".into(),
            from_address: "mylibrary@localhost".into(),
        }
    }
}

impl Default for WeeklyConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            weekday: Weekday::Mon,
            hour: 6,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: Config = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> anyhow::Result<()> {
        if self.auth.mode == AuthMode::Signed && self.auth.secret.as_deref().unwrap_or("").is_empty() {
            anyhow::bail!("auth.mode = \"signed\" needs auth.secret");
        }
        if self.weekly.hour > 23 {
            anyhow::bail!("weekly.hour must be 0-23");
        }
        Ok(())
    }

    pub fn spool_dir(&self) -> PathBuf {
        self.mail
            .spool_dir
            .clone()
            .unwrap_or_else(|| self.data_dir.join("spool"))
    }

    pub fn access_log(&self) -> PathBuf {
        self.data_dir.join("access.log")
    }
}

mod offset {
    use chrono::FixedOffset;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(offset: &FixedOffset, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(offset)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FixedOffset, D::Error> {
        let text = String::deserialize(d)?;
        let text = text.trim();
        if text.eq_ignore_ascii_case("utc") || text == "Z" {
            return Ok(FixedOffset::east_opt(0).expect("zero offset"));
        }
        text.parse::<FixedOffset>()
            .map_err(|_| D::Error::custom(format!("bad utc_offset `{text}`, expected e.g. \"-05:00\"")))
    }
}
