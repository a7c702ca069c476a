use std::io::{self, BufReader};
use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;
use std::thread;

use anyhow::{Context, Result};
use spanmark_core::constraint::{load_vocab, serve};
use spanmark_core::{ConstraintEngine, SessionService};

use crate::error::{invalid, OrInvalid};
use crate::MarkerArgs;

/// `stdio`, `tcp:PORT` or `tcp:HOST:PORT` to a bind address.
fn tcp_addr(listen: &str) -> Result<Option<String>> {
    if listen == "stdio" {
        return Ok(None);
    }
    let rest = listen.strip_prefix("tcp:").ok_or_else(|| invalid(format!("bad --listen {listen:?}")))?;
    let addr = if rest.contains(':') { rest.to_owned() } else { format!("127.0.0.1:{rest}") };
    Ok(Some(addr))
}

pub fn mask_serve(vocab: &Path, listen: &str, markers: &MarkerArgs) -> Result<()> {
    let cfg = markers.config()?;
    let v = load_vocab(vocab, &cfg).or_invalid_with(|| vocab.display().to_string())?;
    let service = Arc::new(SessionService::new(ConstraintEngine::new(v, cfg).or_invalid()?));
    match tcp_addr(listen)? {
        None => serve(&service, io::stdin().lock(), io::stdout().lock()).context("serving stdio")?,
        Some(addr) => {
            let listener = TcpListener::bind(&addr).or_invalid_with(|| format!("cannot listen on {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = match stream {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("accept failed: {e}");
                        continue;
                    }
                };
                let svc = Arc::clone(&service);
                thread::spawn(move || {
                    let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
                    let result = stream.try_clone().and_then(|r| serve(&svc, BufReader::new(r), stream));
                    if let Err(e) = result {
                        eprintln!("connection {peer}: {e}");
                    }
                });
            }
        }
    }
    Ok(())
}
