//! TCP ingestion server.
//!
//! Connections stream newline-delimited wire records. Every connection gets
//! its own reader thread; decoded readings are handed to a single writer
//! thread over a channel, so the sink sees a serialized stream and
//! per-connection arrival order is preserved. Malformed lines bump the
//! rejection counter and never tear down the connection.

use std::io::{BufRead, BufReader, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::telemetry::wire::{decode_reading, SensorReading};

const READ_POLL: Duration = Duration::from_millis(50);

/// Destination for accepted readings. The server serializes all appends
/// through one writer thread, so implementations need no internal locking.
pub trait ReadingSink: Send {
    fn append(&mut self, reading: SensorReading) -> Result<()>;
}

impl ReadingSink for Vec<SensorReading> {
    fn append(&mut self, reading: SensorReading) -> Result<()> {
        self.push(reading);
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Counters {
    accepted: AtomicU64,
    rejected: AtomicU64,
}

/// Final accept/reject tallies reported at shutdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerReport {
    pub accepted: u64,
    pub rejected: u64,
}

/// A running ingestion server; shut down to reclaim the sink.
pub struct ServerHandle<S> {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    counters: Arc<Counters>,
    accept_handle: JoinHandle<()>,
    writer_handle: JoinHandle<std::result::Result<S, String>>,
}

impl<S> ServerHandle<S> {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn accepted(&self) -> u64 {
        self.counters.accepted.load(Ordering::SeqCst)
    }

    pub fn rejected(&self) -> u64 {
        self.counters.rejected.load(Ordering::SeqCst)
    }

    /// Stops accepting, waits for open connections to drain their buffered
    /// lines, flushes the writer, and returns the sink.
    pub fn shutdown(self) -> Result<(S, ServerReport)> {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(self.addr);
        self.accept_handle
            .join()
            .map_err(|_| Error::SinkFailed("accept thread panicked".into()))?;
        let sink = self
            .writer_handle
            .join()
            .map_err(|_| Error::SinkFailed("writer thread panicked".into()))?
            .map_err(Error::SinkFailed)?;
        let report = ServerReport {
            accepted: self.counters.accepted.load(Ordering::SeqCst),
            rejected: self.counters.rejected.load(Ordering::SeqCst),
        };
        Ok((sink, report))
    }
}

/// Binds and starts serving. `bind_addr` may use port 0 to pick an ephemeral
/// port; the bound address is available via [`ServerHandle::local_addr`].
pub fn serve<S, A>(bind_addr: A, sink: S) -> Result<ServerHandle<S>>
where
    S: ReadingSink + 'static,
    A: ToSocketAddrs,
{
    let listener = TcpListener::bind(bind_addr)?;
    let addr = listener.local_addr()?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let counters = Arc::new(Counters::default());
    let (tx, rx) = mpsc::channel::<SensorReading>();

    let writer_handle = thread::spawn(move || {
        let mut sink = sink;
        let mut failure: Option<String> = None;
        for reading in rx {
            if failure.is_none() {
                if let Err(e) = sink.append(reading) {
                    failure = Some(e.to_string());
                }
            }
        }
        match failure {
            None => Ok(sink),
            Some(e) => Err(e),
        }
    });

    let accept_handle = {
        let shutdown = Arc::clone(&shutdown);
        let counters = Arc::clone(&counters);
        thread::spawn(move || {
            let mut connections = Vec::new();
            for stream in listener.incoming() {
                if shutdown.load(Ordering::SeqCst) {
                    break;
                }
                match stream {
                    Ok(stream) => {
                        let tx = tx.clone();
                        let shutdown = Arc::clone(&shutdown);
                        let counters = Arc::clone(&counters);
                        connections.push(thread::spawn(move || {
                            handle_connection(stream, &tx, &shutdown, &counters);
                        }));
                    }
                    Err(e) => {
                        eprintln!("telemetry: accept failed: {e}");
                    }
                }
            }
            drop(tx);
            for conn in connections {
                let _ = conn.join();
            }
        })
    };

    Ok(ServerHandle {
        addr,
        shutdown,
        counters,
        accept_handle,
        writer_handle,
    })
}

fn handle_connection(
    stream: TcpStream,
    tx: &Sender<SensorReading>,
    shutdown: &AtomicBool,
    counters: &Counters,
) {
    let _ = stream.set_read_timeout(Some(READ_POLL));
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    loop {
        match reader.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {
                let complete = line.ends_with('\n');
                match decode_reading(&line) {
                    Ok(reading) => {
                        if tx.send(reading).is_err() {
                            break;
                        }
                        counters.accepted.fetch_add(1, Ordering::SeqCst);
                    }
                    Err(e) => {
                        counters.rejected.fetch_add(1, Ordering::SeqCst);
                        eprintln!("telemetry: {e}");
                    }
                }
                line.clear();
                if !complete {
                    // Final unterminated fragment; the stream is at EOF.
                    break;
                }
            }
            // Timeout: keep any partial line accumulated so far and poll the
            // shutdown flag.
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                if shutdown.load(Ordering::SeqCst) {
                    break;
                }
            }
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) if e.kind() == ErrorKind::InvalidData => {
                // Non-UTF-8 line; the reader already consumed it.
                counters.rejected.fetch_add(1, Ordering::SeqCst);
                eprintln!("telemetry: rejected non-utf8 line");
                line.clear();
            }
            Err(_) => break,
        }
    }
}
