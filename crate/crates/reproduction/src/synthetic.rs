//! NSL-KDD-shaped synthetic data for exercising the pipeline without the
//! real files.

use nids_core::rng::seeded;
use rand::Rng;

const ATTACKS: [&str; 6] = ["neptune", "smurf", "satan", "ipsweep", "portsweep", "guess_passwd"];
const SERVICES: [&str; 6] = ["http", "private", "smtp", "ftp_data", "domain_u", "ecr_i"];

/// `rows` header-less NSL-KDD lines (41 features, raw label, difficulty).
/// Anomalies differ from normal traffic mostly through the connection
/// counters and error rates, with some overlap.
pub fn synthetic_csv(rows: usize, seed: u64) -> String {
    let mut rng = seeded(seed);
    let mut out = String::new();
    for _ in 0..rows {
        let anomaly = rng.gen_bool(0.45);
        let mut v = [0.0f64; 41];
        let (proto, service, flag, label);
        if anomaly {
            label = ATTACKS[rng.gen_range(0..ATTACKS.len())];
            proto = if matches!(label, "smurf" | "ipsweep") { "icmp" } else { "tcp" };
            service = SERVICES[rng.gen_range(0..SERVICES.len())];
            flag = if rng.gen_bool(0.6) { "S0" } else { "REJ" };
            v[4] = f64::from(rng.gen_range(0..1500u32));
            v[22] = f64::from(rng.gen_range(20..400u32));
            v[24] = (rng.gen_range(0.4..1.0f64) * 100.0).round() / 100.0;
            v[31] = 255.0;
        } else {
            label = "normal";
            proto = if rng.gen_bool(0.9) { "tcp" } else { "udp" };
            service = SERVICES[rng.gen_range(0..4)];
            flag = if rng.gen_bool(0.95) { "SF" } else { "REJ" };
            v[4] = f64::from(rng.gen_range(100..5000u32));
            v[5] = f64::from(rng.gen_range(0..20000u32));
            v[11] = 1.0;
            v[22] = f64::from(rng.gen_range(1..60u32));
            v[24] = (rng.gen_range(0.0..0.5f64) * 100.0).round() / 100.0;
            v[31] = f64::from(rng.gen_range(1..256u32));
        }
        for x in v.iter_mut().skip(33) {
            *x = (rng.gen::<f64>() * 100.0).round() / 100.0;
        }
        let mut cols: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        cols[1] = proto.into();
        cols[2] = service.into();
        cols[3] = flag.into();
        out.push_str(&cols.join(","));
        out.push_str(&format!(",{label},{}\n", rng.gen_range(0..22)));
    }
    out
}
