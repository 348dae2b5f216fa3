//! `serve` and `simulate`: the telemetry data path.

use std::net::{SocketAddr, ToSocketAddrs};
use std::path::Path;
use std::thread;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use leafscale::telemetry::sim::NodeProfile;
use leafscale::telemetry::store::FileStore;
use leafscale::telemetry::{serve, simulate_node, simulate_nodes_sequential};

/// Runs the ingestion server with a file-backed store.
///
/// Prints `listening <addr>` once bound. With `--stop-after N` the server
/// shuts down once N readings have been accepted and prints the final
/// counters; without it the process serves until killed.
pub fn cmd_serve(bind: &str, store_path: &Path, stop_after: Option<u64>) -> Result<()> {
    let store = FileStore::open_append(store_path)
        .with_context(|| format!("opening store {}", store_path.display()))?;
    let handle = serve(bind, store).with_context(|| format!("binding {bind}"))?;
    println!("listening {}", handle.local_addr());
    // The pipe may be read by a parent process waiting for the address.
    use std::io::Write;
    std::io::stdout().flush().ok();

    match stop_after {
        Some(limit) => {
            while handle.accepted() < limit {
                thread::sleep(Duration::from_millis(20));
            }
            let (_store, report) = handle.shutdown()?;
            println!("accepted {} rejected {}", report.accepted, report.rejected);
            Ok(())
        }
        None => loop {
            thread::sleep(Duration::from_secs(3600));
        },
    }
}

fn resolve_addr(addr: &str) -> Result<SocketAddr> {
    addr.to_socket_addrs()
        .with_context(|| format!("resolving {addr}"))?
        .next()
        .ok_or_else(|| anyhow!("{addr}: no addresses"))
}

/// Streams `count` readings per node profile to the server.
///
/// By default all nodes share one connection, emitted profile by profile, so
/// the persisted store is byte-identical across runs; `--concurrent` opts
/// into one thread and connection per node for load testing.
pub fn cmd_simulate(
    addr: &str,
    profiles_path: &Path,
    count: usize,
    concurrent: bool,
) -> Result<()> {
    let text = std::fs::read_to_string(profiles_path)
        .with_context(|| format!("reading profiles {}", profiles_path.display()))?;
    let profiles = NodeProfile::parse_profiles(&text)?;
    let addr = resolve_addr(addr)?;

    let mut total = 0usize;
    if concurrent {
        let workers: Vec<_> = profiles
            .into_iter()
            .map(|profile| {
                thread::spawn(move || -> Result<(String, usize)> {
                    let sent = simulate_node(addr, &profile, count)?;
                    Ok((profile.node_id, sent))
                })
            })
            .collect();
        for worker in workers {
            let (node_id, sent) = worker
                .join()
                .map_err(|_| anyhow!("simulator thread panicked"))??;
            println!("node {node_id} sent {sent}");
            total += sent;
        }
    } else {
        for (node_id, sent) in simulate_nodes_sequential(addr, &profiles, count)? {
            println!("node {node_id} sent {sent}");
            total += sent;
        }
    }
    println!("total {total}");
    Ok(())
}
