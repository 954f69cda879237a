// Kept in its own test binary: RUSAGE_CHILDREN covers every child this
// process has waited for, so no other commands may run alongside.
use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

fn children_maxrss_kb() -> i64 {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    assert_eq!(unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) }, 0);
    usage.ru_maxrss
}

#[test]
fn tokenize_streams_with_bounded_memory() {
    const LINES: usize = 100_000;
    const CEILING_KB: i64 = 32 * 1024;
    let mut child = Command::new(env!("CARGO_BIN_EXE_bioling"))
        .args(["--workers", "2", "tokenize"])
        .env_remove("BIOLING_RULES")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let feeder = std::thread::spawn(move || {
        let line = "Interleukin-6 (IL-6) and TNF-alpha levels were elevated in 42 of 57 patients (p < 0.01) [12].\n";
        for _ in 0..LINES {
            stdin.write_all(line.as_bytes()).unwrap();
        }
    });
    let mut count = 0;
    for line in BufReader::new(child.stdout.take().unwrap()).lines() {
        line.unwrap();
        count += 1;
    }
    feeder.join().unwrap();
    assert!(child.wait().unwrap().success());
    assert_eq!(count, LINES);
    let rss = children_maxrss_kb();
    eprintln!("peak child rss: {rss} kB for {LINES} lines");
    assert!(rss < CEILING_KB, "peak rss {rss} kB exceeds {CEILING_KB} kB");
}
