//! Experiment harness: generate an instance, run one pipeline, optionally
//! cross-check against a centralized oracle, and print one JSON record per
//! line.

use std::fs::OpenOptions;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tw_congest::apps::{girth_directed, girth_undirected, max_matching, GirthConfig};
use tw_congest::generate::{self, generate_partial_ktree_with, reweight, KTreeOptions};
use tw_congest::graph::{validate_tree_decomposition, MultiGraph, INF};
use tw_congest::labels::{decode, label_graph};
use tw_congest::oracles::{oracle_apsp, oracle_balance, oracle_girth, oracle_matching};
use tw_congest::separator::{find_balanced_separator, SepConfig};
use tw_congest::sim::{RunStats, SimConfig};
use tw_congest::treedecomp::{build_tree_decomposition, decompose_components};

#[derive(Parser, Debug)]
#[command(name = "twbench", about = "Round-accurate experiments on low-treewidth networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Balanced separator of the whole vertex set.
    Separator(Common),
    /// Distributed tree decomposition.
    Td(Common),
    /// Distance labels built on a distributed tree decomposition.
    Dl(Common),
    /// Weighted girth.
    Girth {
        #[command(flatten)]
        common: Common,
        /// Undirected girth via count-1 walks (the instance is undirected).
        #[arg(long)]
        undirected: bool,
        /// Trials per doubling step are `c1 * ceil(log2 n)`.
        #[arg(long, default_value_t = 2, env = "TWBENCH_C1")]
        c1: u32,
    },
    /// Exact bipartite maximum matching.
    Matching(Common),
    /// One record per grid cell plus an aggregate table.
    Sweep {
        #[arg(value_enum)]
        algo: Algo,
        #[command(flatten)]
        common: Common,
        /// Values of n; an empty list gives an empty table.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        ns: Vec<usize>,
        /// Values of k; defaults to `--k`.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        ks: Vec<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Algo {
    Separator,
    Td,
    Dl,
    Girth,
    Matching,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Family {
    Ktree,
    Path,
    Cycle,
    Grid,
    Star,
    BipartiteKtree,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, value_enum, default_value = "ktree", env = "TWBENCH_FAMILY")]
    family: Family,
    #[arg(long, default_value_t = 100, env = "TWBENCH_N")]
    n: usize,
    #[arg(long, default_value_t = 2, env = "TWBENCH_K")]
    k: usize,
    #[arg(long, default_value_t = 0.7, env = "TWBENCH_KEEP_PROB")]
    keep_prob: f64,
    /// Weights are drawn from `1..=max_weight`.
    #[arg(long, default_value_t = 1, env = "TWBENCH_MAX_WEIGHT")]
    max_weight: u64,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 0, env = "TWBENCH_SEED")]
    seed: u64,
    #[arg(long, default_value = "desk", env = "TWBENCH_PROFILE", value_parser = ["paper", "desk"])]
    profile: String,
    /// Cross-check against a centralized oracle; exit 1 on mismatch.
    #[arg(long)]
    verify: bool,
    #[arg(long, env = "TWBENCH_MAX_ROUNDS")]
    max_rounds: Option<u64>,
    #[arg(long, default_value_t = 32, env = "TWBENCH_BANDWIDTH_FACTOR")]
    bandwidth_factor: usize,
    /// Append records to this file instead of stdout.
    #[arg(long, env = "TWBENCH_OUT")]
    out: Option<std::path::PathBuf>,
}

impl Common {
    fn sim(&self) -> SimConfig {
        let mut s = SimConfig { bandwidth_factor: self.bandwidth_factor, ..Default::default() };
        if let Some(r) = self.max_rounds {
            s.max_rounds = r;
        }
        s
    }

    fn sep(&self) -> SepConfig {
        SepConfig::by_name(&self.profile).expect("validated by clap")
    }

    fn instance(&self, directed: bool) -> Result<MultiGraph> {
        let n = self.n;
        let w = 1..=self.max_weight.max(1);
        let g = match self.family {
            Family::Ktree | Family::BipartiteKtree => {
                let opts = KTreeOptions {
                    directed,
                    connected: true,
                    bipartite: self.family == Family::BipartiteKtree,
                    ..Default::default()
                };
                return Ok(generate_partial_ktree_with(n, self.k, self.keep_prob, w, self.seed, &opts)?.graph);
            }
            Family::Path => generate::path(n).graph,
            Family::Cycle => {
                if n < 3 {
                    bail!("cycle needs n >= 3");
                }
                generate::cycle(n).graph
            }
            Family::Grid => {
                let rows = ((n as f64).sqrt() as usize).max(1);
                generate::grid(rows, n.div_ceil(rows)).graph
            }
            Family::Star => generate::star(n).graph,
        };
        let g = if directed { MultiGraph::new(g.n(), true, g.edges().to_vec())? } else { g };
        Ok(if self.max_weight > 1 { reweight(&g, w, self.seed) } else { g })
    }

    fn descriptor(&self, g: &MultiGraph) -> Value {
        json!({
            "family": self.family.to_possible_value().map(|v| v.get_name().to_string()),
            "n": g.n(),
            "m": g.m(),
            "k": self.k,
            "keep_prob": self.keep_prob,
            "max_weight": self.max_weight,
            "directed": g.is_directed(),
            "diameter": g.comm_graph().diameter(),
        })
    }
}

fn inf_to_json(x: u64) -> Value {
    if x == INF {
        Value::Null
    } else {
        json!(x)
    }
}

/// Summary, oracle verdict (`None` when not verifying) and statistics.
type Outcome = (Value, Option<bool>, RunStats);

fn run_separator(c: &Common, g: &MultiGraph) -> Result<Outcome> {
    let comm = g.comm_graph();
    let cfg = c.sep();
    let xs: Vec<usize> = (0..g.n()).collect();
    let o = find_balanced_separator(&comm, &xs, &cfg, c.seed, &c.sim())?;
    let balance = oracle_balance(&comm, &o.separator, &xs, (cfg.alpha_num, cfg.alpha_den));
    let bound = cfg.size_bound(o.t);
    let within = o.separator.len() as u64 <= bound;
    let summary = json!({
        "size": o.separator.len(),
        "t": o.t,
        "t_history": o.t_history,
        "size_bound": bound,
        "balance": balance,
        "within_bound": within,
    });
    Ok((summary, c.verify.then_some(balance && within), o.stats))
}

fn run_td(c: &Common, g: &MultiGraph) -> Result<Outcome> {
    let o = build_tree_decomposition(g, &c.sep(), c.seed, &c.sim())?;
    let valid = validate_tree_decomposition(g, &o.td).valid;
    let summary = json!({
        "width": o.width,
        "depth": o.depth,
        "max_t": o.max_t,
        "width_bound": o.width_bound,
        "depth_bound": o.depth_bound,
        "valid": valid,
        "levels": o.levels,
    });
    Ok((summary, c.verify.then_some(valid && o.width_ok()), o.stats))
}

/// Decompositions tried before the labelling gives up.
const DL_ATTEMPTS: u32 = 5;

fn run_dl(c: &Common, g: &MultiGraph) -> Result<Outcome> {
    let sim = c.sim();
    let l = label_graph(g, &c.sep(), c.seed, &sim, DL_ATTEMPTS)?;
    let (t, dl) = (&l.td, &l.dl);
    let sizes: Vec<usize> = dl.labels.iter().map(|l| l.hubs.len()).collect();
    let verdict = if c.verify {
        let d = oracle_apsp(g);
        let mut ok = true;
        for u in 0..g.n() {
            for v in 0..g.n() {
                ok &= decode(&dl.labels[u], &dl.labels[v])? == d[u][v];
            }
        }
        Some(ok)
    } else {
        None
    };
    let summary = json!({
        "width": t.width,
        "depth": t.depth,
        "max_label": sizes.iter().max(),
        "mean_label": sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64,
        "td_rounds": t.stats.rounds,
        "dl_rounds": dl.stats.rounds,
        "retries": l.retries,
    });
    Ok((summary, verdict, l.stats.clone()))
}

fn run_girth(c: &Common, g: &MultiGraph, c1: u32) -> Result<Outcome> {
    let sim = c.sim();
    let (value, trials, stats) = if g.is_directed() {
        let dec = decompose_components(&g.comm_graph(), &c.sep(), c.seed, &sim)?;
        let o = girth_directed(g, &dec.td, &sim)?;
        let mut st = dec.stats;
        st.then(&o.stats);
        (o.girth, 0, st)
    } else {
        let cfg = GirthConfig { c1, sep: c.sep(), ..Default::default() };
        let o = girth_undirected(g, &cfg, c.seed, &sim)?;
        (o.girth, o.trials.len(), o.stats)
    };
    let verdict = c.verify.then(|| oracle_girth(g) == value);
    Ok((json!({ "girth": inf_to_json(value), "trials": trials }), verdict, stats))
}

fn run_matching(c: &Common, g: &MultiGraph) -> Result<Outcome> {
    let o = max_matching(g, &c.sep(), c.seed, &c.sim())?;
    let walks_ok = o.augmentations.iter().all(|a| a.is_simple() && a.is_alternating());
    let verdict = c
        .verify
        .then(|| oracle_matching(g).len() == o.matching.size() && o.intermediate_valid && walks_ok);
    let summary = json!({
        "size": o.matching.size(),
        "augmentations": o.augmentations.len(),
        "cdl_builds": o.cdl_builds,
        "intermediate_valid": o.intermediate_valid,
        "walks_simple_alternating": walks_ok,
    });
    Ok((summary, verdict, o.stats))
}

fn execute(algo: Algo, c: &Common, undirected_girth: bool, c1: u32) -> Result<(Value, Option<bool>)> {
    let directed = match algo {
        Algo::Girth => !undirected_girth,
        Algo::Matching => false,
        _ => c.directed,
    };
    let g = c.instance(directed).context("instance generation")?;
    let out = match algo {
        Algo::Separator => run_separator(c, &g),
        Algo::Td => run_td(c, &g),
        Algo::Dl => run_dl(c, &g),
        Algo::Girth => run_girth(c, &g, c1),
        Algo::Matching => run_matching(c, &g),
    };
    let mut rec = json!({
        "command": format!("{:?}", algo).to_lowercase(),
        "instance": c.descriptor(&g),
        "seed": c.seed,
        "profile": c.profile,
    });
    let verdict = match out {
        Ok((summary, verdict, stats)) => {
            rec["output"] = summary;
            rec["stats"] = serde_json::to_value(&stats)?;
            verdict
        }
        Err(e) => {
            rec["error"] = json!(e.to_string());
            Some(false)
        }
    };
    rec["verdict"] = json!(match verdict {
        Some(true) => "pass",
        Some(false) if rec.get("error").is_some() => "error",
        Some(false) => "fail",
        None => "unchecked",
    });
    Ok((rec, verdict))
}

struct Sink(Box<dyn Write>);

impl Sink {
    fn open(out: &Option<std::path::PathBuf>) -> Result<Sink> {
        Ok(Sink(match out {
            Some(p) => Box::new(OpenOptions::new().create(true).append(true).open(p)?),
            None => Box::new(std::io::stdout()),
        }))
    }

    fn emit(&mut self, v: &Value) -> Result<()> {
        writeln!(self.0, "{}", serde_json::to_string(v)?)?;
        self.0.flush()?;
        Ok(())
    }
}

fn main_inner(cli: Cli) -> Result<bool> {
    let (algo, common, undirected, c1) = match &cli.cmd {
        Cmd::Separator(c) => (Algo::Separator, c, false, 2),
        Cmd::Td(c) => (Algo::Td, c, false, 2),
        Cmd::Dl(c) => (Algo::Dl, c, false, 2),
        Cmd::Girth { common, undirected, c1 } => (Algo::Girth, common, *undirected, *c1),
        Cmd::Matching(c) => (Algo::Matching, c, false, 2),
        Cmd::Sweep { algo, common, ns, ks } => {
            let mut sink = Sink::open(&common.out)?;
            let ks = if ks.is_empty() { vec![common.k] } else { ks.clone() };
            let mut table = Vec::new();
            let mut ok = true;
            let cells: Vec<(usize, usize)> = ns.iter().flat_map(|&n| ks.iter().map(move |&k| (n, k))).collect();
            for (idx, &(n, k)) in cells.iter().enumerate() {
                let cell = Common { n, k, seed: common.seed ^ idx as u64, ..common.clone() };
                let (rec, verdict) = execute(*algo, &cell, false, 2)?;
                ok &= verdict != Some(false);
                table.push(json!({
                    "n": n,
                    "k": k,
                    "seed": cell.seed,
                    "rounds": rec.pointer("/stats/rounds"),
                    "diameter": rec.pointer("/instance/diameter"),
                    "verdict": rec["verdict"],
                }));
                sink.emit(&rec)?;
            }
            sink.emit(&json!({
                "command": "sweep",
                "algo": format!("{:?}", algo).to_lowercase(),
                "profile": common.profile,
                "base_seed": common.seed,
                "table": table,
            }))?;
            return Ok(ok);
        }
    };
    let mut sink = Sink::open(&common.out)?;
    let (rec, verdict) = execute(algo, common, undirected, c1)?;
    sink.emit(&rec)?;
    Ok(verdict != Some(false))
}

fn main() -> ExitCode {
    // Flag errors exit with status 2 from inside clap.
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
