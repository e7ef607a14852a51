//! Built-in verification corpus: structured circuits (GHZ, QFT, W states)
//! plus seeded random Clifford+T and rotation circuits, all as OpenQASM 2.0
//! text. Generation is deterministic for a given seed.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub qubits: u32,
    pub qasm: String,
}

fn header(nq: u32) -> String {
    format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{nq}];\n")
}

pub fn ghz(nq: u32) -> CorpusEntry {
    assert!(nq >= 2);
    let mut s = header(nq);
    s.push_str("h q[0];\n");
    for k in 1..nq {
        writeln!(s, "cx q[{}],q[{}];", k - 1, k).unwrap();
    }
    CorpusEntry {
        name: format!("ghz_{nq:02}"),
        qubits: nq,
        qasm: s,
    }
}

pub fn qft(nq: u32) -> CorpusEntry {
    assert!(nq >= 1);
    let mut s = header(nq);
    for j in 0..nq {
        writeln!(s, "h q[{j}];").unwrap();
        for k in (j + 1)..nq {
            writeln!(s, "cu1(pi/{}) q[{k}],q[{j}];", 1u64 << (k - j)).unwrap();
        }
    }
    for j in 0..nq / 2 {
        writeln!(s, "swap q[{j}],q[{}];", nq - 1 - j).unwrap();
    }
    CorpusEntry {
        name: format!("qft_{nq:02}"),
        qubits: nq,
        qasm: s,
    }
}

/// Linear-depth W-state preparation: one excitation walks down the chain,
/// splitting at each site so every basis state with a single 1 gets
/// amplitude 1/sqrt(nq).
pub fn w_state(nq: u32) -> CorpusEntry {
    assert!(nq >= 2);
    let mut s = header(nq);
    s.push_str("x q[0];\n");
    for k in 1..nq {
        let theta = 2.0 * (1.0 / f64::sqrt((nq - k + 1) as f64)).acos();
        writeln!(s, "cu3({theta:?},0,0) q[{}],q[{k}];", k - 1).unwrap();
        writeln!(s, "cx q[{k}],q[{}];", k - 1).unwrap();
    }
    CorpusEntry {
        name: format!("w_{nq:02}"),
        qubits: nq,
        qasm: s,
    }
}

pub fn random_clifford_t(index: u32, rng: &mut ChaCha8Rng) -> CorpusEntry {
    let nq = rng.gen_range(2..=8u32);
    let gate_count = rng.gen_range(20..=60u32);
    let mut s = header(nq);
    const ONE_QUBIT: [&str; 8] = ["h", "s", "sdg", "t", "tdg", "x", "y", "z"];
    for _ in 0..gate_count {
        if rng.gen_bool(0.3) {
            let c = rng.gen_range(0..nq);
            let t = (c + rng.gen_range(1..nq)) % nq;
            writeln!(s, "cx q[{c}],q[{t}];").unwrap();
        } else {
            let g = ONE_QUBIT[rng.gen_range(0..ONE_QUBIT.len())];
            writeln!(s, "{g} q[{}];", rng.gen_range(0..nq)).unwrap();
        }
    }
    CorpusEntry {
        name: format!("clifford_t_{index:02}"),
        qubits: nq,
        qasm: s,
    }
}

pub fn random_rotations(index: u32, rng: &mut ChaCha8Rng) -> CorpusEntry {
    let nq = rng.gen_range(1..=6u32);
    let gate_count = rng.gen_range(15..=40u32);
    let mut s = header(nq);
    const PARAM: [&str; 4] = ["rx", "ry", "rz", "p"];
    const CONTROLLED: [&str; 4] = ["crx", "cry", "crz", "cp"];
    for _ in 0..gate_count {
        let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        if nq >= 2 && rng.gen_bool(0.25) {
            let c = rng.gen_range(0..nq);
            let t = (c + rng.gen_range(1..nq)) % nq;
            let g = CONTROLLED[rng.gen_range(0..CONTROLLED.len())];
            writeln!(s, "{g}({angle:?}) q[{c}],q[{t}];").unwrap();
        } else {
            let g = PARAM[rng.gen_range(0..PARAM.len())];
            writeln!(s, "{g}({angle:?}) q[{}];", rng.gen_range(0..nq)).unwrap();
        }
    }
    CorpusEntry {
        name: format!("rotations_{index:02}"),
        qubits: nq,
        qasm: s,
    }
}

/// The full corpus for one seed: 15 GHZ, 8 QFT, 9 W, 10 Clifford+T, 10
/// rotation circuits (52 total), spanning 1 to 16 qubits.
pub fn generate(seed: u64) -> Vec<CorpusEntry> {
    let mut entries = Vec::new();
    for nq in 2..=16 {
        entries.push(ghz(nq));
    }
    for nq in 1..=8 {
        entries.push(qft(nq));
    }
    for nq in 2..=10 {
        entries.push(w_state(nq));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..10 {
        entries.push(random_clifford_t(i, &mut rng));
    }
    for i in 0..10 {
        entries.push(random_rotations(i, &mut rng));
    }
    entries
}
