//! Outgoing mail: message rendering and the pluggable transports.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mailbox {
    #[serde(default)]
    pub name: String,
    pub address: String,
}

impl Mailbox {
    pub fn new(name: impl Into<String>, address: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            address: address.into(),
        }
    }

    fn header_value(&self) -> String {
        if self.name.is_empty() {
            format!("<{}>", self.address)
        } else {
            format!("{} <{}>", encode_word(&self.name), self.address)
        }
    }
}

/// A plain-text message. `id` names the spool file and the Message-ID.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Email {
    pub id: String,
    pub from: Mailbox,
    pub to: Mailbox,
    pub subject: String,
    pub body: String,
    pub date: DateTime<FixedOffset>,
}

// RFC 2047 encoded-word for header text that is not plain ASCII.
fn encode_word(text: &str) -> String {
    let plain = text
        .bytes()
        .all(|b| (0x20..0x7f).contains(&b) && !b"\"()<>,;:@[]\\".contains(&b));
    if plain {
        text.to_string()
    } else {
        format!("=?utf-8?B?{}?=", STANDARD.encode(text))
    }
}

// Unstructured headers only need encoding outside printable ASCII.
fn encode_text(text: &str) -> String {
    if text.bytes().all(|b| (0x20..0x7f).contains(&b)) {
        text.to_string()
    } else {
        format!("=?utf-8?B?{}?=", STANDARD.encode(text))
    }
}

impl Email {
    /// RFC 5322 text with CRLF line endings; deterministic for a given value.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut header = |name: &str, value: &str| {
            out.push_str(name);
            out.push_str(": ");
            out.push_str(value);
            out.push_str("\r\n");
        };
        header("Date", &self.date.to_rfc2822());
        header("From", &self.from.header_value());
        header("To", &self.to.header_value());
        header("Subject", &encode_text(&self.subject));
        let domain = self.from.address.rsplit('@').next().unwrap_or("localhost");
        header("Message-ID", &format!("<{}@{}>", self.id, domain));
        header("MIME-Version", "1.0");
        header("Content-Type", "text/plain; charset=utf-8");
        header("Content-Transfer-Encoding", "8bit");
        out.push_str("\r\n");
        for line in self.body.lines() {
            out.push_str(line);
            out.push_str("\r\n");
        }
        out
    }
}

pub trait MailTransport: Send + Sync {
    fn send(&self, email: &Email) -> Result<()>;
}

/// Prints messages to standard output.
#[derive(Debug, Default)]
pub struct StdoutTransport;

impl MailTransport for StdoutTransport {
    fn send(&self, email: &Email) -> Result<()> {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        writeln!(out, "----- {} -----", email.id)?;
        out.write_all(email.render().replace("\r\n", "\n").as_bytes())?;
        Ok(())
    }
}

/// Writes each message to `{dir}/{id}.eml`.
#[derive(Debug, Clone)]
pub struct SpoolTransport {
    dir: PathBuf,
}

impl SpoolTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &std::path::Path {
        &self.dir
    }
}

impl MailTransport for SpoolTransport {
    fn send(&self, email: &Email) -> Result<()> {
        if email.id.is_empty() || email.id.contains(['/', '\\']) || email.id.starts_with('.') {
            return Err(Error::Transport(format!("unusable spool name {:?}", email.id)));
        }
        let path = self.dir.join(format!("{}.eml", email.id));
        let tmp = self.dir.join(format!(".{}.eml.tmp", email.id));
        fs::write(&tmp, email.render())?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

/// Minimal SMTP client: plain connection, no authentication.
#[derive(Debug, Clone)]
pub struct SmtpTransport {
    host: String,
    port: u16,
    helo: String,
    timeout: Duration,
}

impl SmtpTransport {
    pub fn new(host: impl Into<String>, port: u16) -> Self {
        Self {
            host: host.into(),
            port,
            helo: "localhost".into(),
            timeout: Duration::from_secs(30),
        }
    }

    pub fn helo(mut self, name: impl Into<String>) -> Self {
        self.helo = name.into();
        self
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn session(&self, email: &Email) -> io::Result<std::result::Result<(), String>> {
        let addr = (self.host.as_str(), self.port)
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, "no address for smtp host"))?;
        let stream = TcpStream::connect_timeout(&addr, self.timeout)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut writer = stream;

        let expect = |reader: &mut BufReader<TcpStream>, code: u16| -> io::Result<std::result::Result<(), String>> {
            let (got, text) = read_reply(reader)?;
            Ok(if got == code { Ok(()) } else { Err(format!("expected {code}, got {got} {text}")) })
        };

        macro_rules! step {
            ($cmd:expr, $code:expr) => {{
                if let Some(cmd) = $cmd {
                    writer.write_all(cmd.as_bytes())?;
                    writer.write_all(b"\r\n")?;
                }
                if let Err(e) = expect(&mut reader, $code)? {
                    return Ok(Err(e));
                }
            }};
        }

        step!(None::<String>, 220);
        step!(Some(format!("EHLO {}", self.helo)), 250);
        step!(Some(format!("MAIL FROM:<{}>", email.from.address)), 250);
        step!(Some(format!("RCPT TO:<{}>", email.to.address)), 250);
        step!(Some("DATA".to_string()), 354);
        let mut data = String::new();
        for line in email.render().split_inclusive("\r\n") {
            if line.starts_with('.') {
                data.push('.');
            }
            data.push_str(line);
        }
        data.push_str(".\r\n");
        writer.write_all(data.as_bytes())?;
        step!(None::<String>, 250);
        step!(Some("QUIT".to_string()), 221);
        Ok(Ok(()))
    }
}

fn read_reply(reader: &mut impl BufRead) -> io::Result<(u16, String)> {
    let mut text = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "smtp connection closed"));
        }
        let code = line
            .get(..3)
            .and_then(|c| c.parse::<u16>().ok())
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "malformed smtp reply"))?;
        text.push_str(line.get(4..).unwrap_or("").trim_end());
        if line.as_bytes().get(3) != Some(&b'-') {
            return Ok((code, text));
        }
        text.push(' ');
    }
}

impl MailTransport for SmtpTransport {
    fn send(&self, email: &Email) -> Result<()> {
        match self.session(email) {
            Ok(Ok(())) => Ok(()),
            Ok(Err(reply)) => Err(Error::Transport(reply)),
            Err(e) => Err(Error::Transport(e.to_string())),
        }
    }
}

/// Keeps every message in memory; handy for tests and dry runs.
#[derive(Debug, Default)]
pub struct MemoryTransport {
    sent: Mutex<Vec<Email>>,
}

impl MemoryTransport {
    pub fn sent(&self) -> Vec<Email> {
        self.sent.lock().unwrap().clone()
    }
}

impl MailTransport for MemoryTransport {
    fn send(&self, email: &Email) -> Result<()> {
        self.sent.lock().unwrap().push(email.clone());
        Ok(())
    }
}
