//! Abscissa-grid grammar shared by the pdf/thorin/psi subcommands:
//! `lin:a:b:n`, `log:a:b:n`, or a bare comma list `0.5,1,2`.

const MAX_POINTS: usize = 1_000_000;

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let s = spec.trim();
    if let Some(rest) = s.strip_prefix("lin:") {
        let (a, b, n) = parse_range(rest)?;
        if n == 1 {
            return Ok(vec![a]);
        }
        let step = (b - a) / (n - 1) as f64;
        return Ok((0..n).map(|i| a + step * i as f64).collect());
    }
    if let Some(rest) = s.strip_prefix("log:") {
        let (a, b, n) = parse_range(rest)?;
        if !(a > 0.0 && b > 0.0) {
            return Err(format!("log grid needs positive endpoints, got {a}:{b}"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let ratio = (b / a).powf(1.0 / (n - 1) as f64);
        let mut x = a;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(x);
            x *= ratio;
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| format!("bad grid value '{tok}' in '{s}'"))?;
        if !v.is_finite() {
            return Err(format!("grid values must be finite, got '{tok}'"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(format!("empty grid spec '{s}'"));
    }
    if out.len() > MAX_POINTS {
        return Err(format!("grid has {} points, cap is {MAX_POINTS}", out.len()));
    }
    Ok(out)
}

fn parse_range(rest: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected a:b:n after the grid prefix, got '{rest}'"));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad grid start '{}'", parts[0]))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad grid end '{}'", parts[1]))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad grid count '{}'", parts[2]))?;
    if !a.is_finite() || !b.is_finite() {
        return Err(format!("grid endpoints must be finite, got {a}:{b}"));
    }
    if n == 0 {
        return Err("grid needs at least one point".into());
    }
    if n > MAX_POINTS {
        return Err(format!("grid has {n} points, cap is {MAX_POINTS}"));
    }
    Ok((a, b, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_and_list_forms() {
        let lin = parse_grid("lin:0:1:5").unwrap();
        assert_eq!(lin, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = parse_grid("log:1:100:3").unwrap();
        assert!((log[1] - 10.0).abs() < 1e-12);
        assert_eq!(log.len(), 3);
        let list = parse_grid("0.5, 1,2").unwrap();
        assert_eq!(list, vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_grid("lin:2:9:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(parse_grid("lin:0:1").is_err());
        assert!(parse_grid("log:-1:5:4").is_err());
        assert!(parse_grid("lin:0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("").is_err());
    }
}
