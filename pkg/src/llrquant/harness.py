"""Experiment runners: capacity, outage, boundary sweep, BER, level sweep.

Every experiment is a pure function of (config, seed): randomness is
drawn from counter-based substreams keyed by stage and trial index, and
reductions use integer counters, so results are byte-identical for any
worker count. Common random numbers across quantizer settings and SNR
points keep measured gaps far less noisy than the individual curves.

CSV is the single output format; every Monte-Carlo row carries either a
standard error or enough raw counts to compute one.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .analytic_siso import SisoLlrDensity, outage_rates_siso
from .channel import LinkConfig, sigma2_from_snr_db
from .demod import candidate_table, maxlog_llr_block
from .estimator import design_quantizer_online
from .infotheory import (QuantizerSpec, bin_counts, ergodic_rate_mc,
                         mutual_information_from_counts, mutual_information_stderr,
                         outage_probability, sweep_boundary_2bit)
from .ldpc import LLR_CLIP, ParityCheckCode, build_code, decode_bp, encode
from .link import collect_labeled_llrs, collect_labeled_llrs_fixed_channel
from .modem import (Interleaver, ScramblerSequence, deinterleave, descramble_llrs,
                    draw_interleaver, draw_scrambler, interleave, scramble)
from .quant import LlrQuantizer, quantize, quantizer_from_samples

NON_QUANTIZED = 0  # q_bits value of the non-quantized reference in CSV output


@dataclass
class ExperimentConfig:
    """Shared knobs of all experiment runners; unused fields are ignored."""

    experiment: str = ""
    mt: int = 1
    mr: int = 1
    constellation: str = "bpsk"
    fading: str = "ergodic"
    snr_grid_db: tuple = ()
    q_bits: tuple = (1, 2, 3, NON_QUANTIZED)
    target_rates: tuple = ()
    seed: int = 0
    quantizer_mode: str = "offline"
    output_path: str = ""
    # Monte-Carlo budgets
    trials_calibration: int = 100_000
    trials_evaluation: int = 100_000
    n_channels: int = 10_000
    n_noise: int = 20_000
    # LDPC / BER
    block_length: int = 64_000
    dv: int = 3
    dc: int = 6
    max_iterations: int = 50
    min_bit_errors: int = 200
    max_codewords: int = 2_000
    online_budget: int = 100_000
    # sweeps
    i3_grid: tuple = ()
    level_grid: tuple = ()
    search_range_db: tuple = (-10.0, 40.0)

    def link(self, snr_db: float) -> LinkConfig:
        return LinkConfig(self.mt, self.mr, sigma2_from_snr_db(snr_db, self.mt),
                          self.constellation, self.fading)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(_fmt(v) for v in row) + "\n"
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(text)


def _q_spec(q: int) -> QuantizerSpec:
    if q == NON_QUANTIZED:
        return QuantizerSpec("none")
    return QuantizerSpec("equiprobable", q=q)


# ---------------------------------------------------------------------------
# Capacity and outage
# ---------------------------------------------------------------------------


def run_ergodic_capacity(cfg: ExperimentConfig, threads: int = 1):
    """Rate of the equivalent channel per (SNR, word length), plus reference."""
    rows = []
    for snr in cfg.snr_grid_db:
        link = cfg.link(snr)
        for q in cfg.q_bits:
            rate, se = ergodic_rate_mc(link, _q_spec(q), cfg.seed,
                                       cfg.trials_calibration, cfg.trials_evaluation,
                                       threads=threads)
            rows.append([float(snr), int(q), rate, se])
    write_csv(cfg.output_path, ["snr_db", "q_bits", "rate_bpcu", "stderr"], rows)
    return rows


def _outage_rates_one_channel(args):
    cfg, snr_idx, trial, q_list = args
    snr = cfg.snr_grid_db[snr_idx]
    link = cfg.link(snr)
    ch_rng = rngmod.substream(cfg.seed, rngmod.STAGE_CHANNEL, trial)
    shape = (link.mr, link.mt)
    H = (ch_rng.standard_normal(shape) + 1j * ch_rng.standard_normal(shape)) / np.sqrt(2)
    ev_rng = rngmod.substream(cfg.seed, rngmod.STAGE_EVALUATION, snr_idx, trial)
    samples = collect_labeled_llrs_fixed_channel(link, H, cfg.n_noise, ev_rng)
    r0 = link.bits_per_use
    out = []
    for q in q_list:
        spec = _q_spec(q)
        k = spec.n_bins()
        if spec.kind == "none":
            k = min(k, 256)  # per-realization budgets cannot support 2^12 bins
        from .quant import design_boundaries_empirical

        b = design_boundaries_empirical(samples.llr, k)
        counts = bin_counts(samples.llr, samples.bit, b)
        i_bit = mutual_information_from_counts(counts, bias_correction=spec.kind == "none")
        out.append(r0 * i_bit)
    return out


def outage_rate_table(cfg: ExperimentConfig, threads: int = 1) -> np.ndarray:
    """Per-realization rates, shape (n_snr, n_q, n_channels).

    SISO BPSK goes through the closed-form conditional transitions; MIMO
    estimates transitions per realization. Channel draws are shared
    across SNR points and word lengths (common random numbers).
    """
    n_snr, n_q = len(cfg.snr_grid_db), len(cfg.q_bits)
    table = np.empty((n_snr, n_q, cfg.n_channels))
    link0 = cfg.link(cfg.snr_grid_db[0] if cfg.snr_grid_db else 0.0)
    if link0.is_siso_bpsk:
        h = rngmod.substream(cfg.seed, rngmod.STAGE_CHANNEL).standard_normal(cfg.n_channels)
        for i, snr in enumerate(cfg.snr_grid_db):
            s2 = sigma2_from_snr_db(snr, cfg.mt)
            for j, q in enumerate(cfg.q_bits):
                k = None if q == NON_QUANTIZED else 2 ** q
                table[i, j] = outage_rates_siso(s2, k, h)
        return table
    jobs = [(cfg, i, t, tuple(cfg.q_bits))
            for i in range(n_snr) for t in range(cfg.n_channels)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_outage_rates_one_channel, jobs, chunksize=16))
    else:
        results = [_outage_rates_one_channel(j) for j in jobs]
    for idx, res in enumerate(results):
        i, t = divmod(idx, cfg.n_channels)
        table[i, :, t] = res
    return table


def run_outage(cfg: ExperimentConfig, threads: int = 1):
    """Outage probability curves with 95% confidence intervals."""
    table = outage_rate_table(cfg, threads=threads)
    rows = []
    for i, snr in enumerate(cfg.snr_grid_db):
        for j, q in enumerate(cfg.q_bits):
            for r in cfg.target_rates:
                p, (lo, hi) = outage_probability(table[i, j], float(r))
                rows.append([float(snr), int(q), float(r), p, lo, hi])
    write_csv(cfg.output_path,
              ["snr_db", "q_bits", "target_rate", "p_out", "ci_lo", "ci_hi"], rows)
    return rows


def run_boundary_sweep(cfg: ExperimentConfig, threads: int = 1):
    """Required SNR against the outer boundary of 2-bit quantizers."""
    rows = []
    link = cfg.link(0.0)
    for r in cfg.target_rates:
        points = sweep_boundary_2bit(cfg.i3_grid, link, float(r), cfg.search_range_db,
                                     seed=cfg.seed, n_calibration=cfg.trials_calibration,
                                     n_evaluation=cfg.trials_evaluation, threads=threads)
        for p in points:
            rows.append([float(r), p.i3, p.required_snr_db,
                         p.is_grid_min, p.is_proposed])
    write_csv(cfg.output_path,
              ["target_rate", "i3", "required_snr_db", "is_grid_min", "is_proposed"],
              rows)
    return rows


# ---------------------------------------------------------------------------
# Coded BER pipelines
# ---------------------------------------------------------------------------


def design_quantizer_offline(cfg: ExperimentConfig, snr_db: float, q: int,
                             threads: int = 1) -> LlrQuantizer:
    """Boundaries and levels from a labeled calibration run.

    SISO BPSK uses the closed forms; other systems run a Monte-Carlo
    calibration with known code bits.
    """
    link = cfg.link(snr_db)
    if link.is_siso_bpsk:
        return SisoLlrDensity(link.sigma2).design_quantizer(2 ** q)
    cal = collect_labeled_llrs(link, cfg.trials_calibration, cfg.seed,
                               rngmod.STAGE_CALIBRATION, threads=threads)
    return quantizer_from_samples(cal.llr, cal.bit, 2 ** q)


def design_quantizer_on_the_fly(cfg: ExperimentConfig, snr_db: float, q: int,
                                threads: int = 1) -> LlrQuantizer:
    """Boundaries from quantiles, levels from the two-sided exponential fit."""
    link = cfg.link(snr_db)
    uses = max(1, cfg.online_budget // link.bits_per_use)
    samples = collect_labeled_llrs(link, uses, cfg.seed, rngmod.STAGE_ONLINE,
                                   threads=threads)
    qz, _ = design_quantizer_online(samples.llr, 2 ** q)
    return qz


class _BerChain:
    """One (SNR, quantizer) BER simulation with per-codeword streams."""

    def __init__(self, cfg: ExperimentConfig, code: ParityCheckCode, snr_db: float,
                 qz: LlrQuantizer | None):
        self.cfg = cfg
        self.code = code
        self.link = cfg.link(snr_db)
        self.qz = qz
        self.table = (None if self.link.is_siso_bpsk
                      else candidate_table(cfg.constellation, cfg.mt))
        r0 = self.link.bits_per_use
        if code.n % r0:
            raise ValueError("block length must be a multiple of bits per use")
        self.n_uses = code.n // r0

    def simulate_codeword(self, j: int) -> tuple[int, np.ndarray]:
        cfg, code, link = self.cfg, self.code, self.link
        data_rng = rngmod.substream(cfg.seed, rngmod.STAGE_DATA, j)
        u = data_rng.integers(0, 2, size=code.k, dtype=np.uint8)
        cw = encode(code, u)
        il = draw_interleaver(code.n, rngmod.substream(cfg.seed, rngmod.STAGE_INTERLEAVER, j))
        sc = draw_scrambler(code.n, rngmod.substream(cfg.seed, rngmod.STAGE_SCRAMBLER, j))
        tx_bits = scramble(interleave(cw, il), sc)
        ch_rng = rngmod.substream(cfg.seed, rngmod.STAGE_CHANNEL, j)
        llr = self._channel_and_demod(tx_bits, ch_rng)
        if self.qz is None:
            d = np.clip(llr, -LLR_CLIP, LLR_CLIP)
        else:
            _, d = quantize(llr, self.qz)
        d = deinterleave(descramble_llrs(d, sc), il)
        res = decode_bp(code, d, max_iter=cfg.max_iterations)
        errors = int(np.count_nonzero(res.bits != u))
        return errors, res.bits

    def _channel_and_demod(self, tx_bits: np.ndarray, rng) -> np.ndarray:
        link = self.link
        if link.is_siso_bpsk:
            h = rng.standard_normal(self.n_uses)
            w = rng.standard_normal(self.n_uses)
            x = 2.0 * tx_bits.astype(float) - 1.0
            y = h * x + w * np.sqrt(2.0 * link.sigma2)
            return h * y / link.sigma2
        table = self.table
        r0 = link.bits_per_use
        idx = table.index_of_bits(tx_bits.reshape(self.n_uses, r0))
        x = table.vectors[idx]
        shape = (self.n_uses, link.mr, link.mt)
        H = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        w = rng.standard_normal((self.n_uses, link.mr)) + 1j * rng.standard_normal((self.n_uses, link.mr))
        y = np.einsum("nrt,nt->nr", H, x) + w * np.sqrt(link.sigma2 / 2.0)
        return maxlog_llr_block(y, H, link.sigma2, table).ravel()


def _ber_chunk(args):
    chain, lo, hi = args
    errors = 0
    for j in range(lo, hi):
        e, _ = chain.simulate_codeword(j)
        errors += e
    return errors


def simulate_ber(cfg: ExperimentConfig, code: ParityCheckCode, snr_db: float,
                 qz: LlrQuantizer | None, threads: int = 1,
                 chunk: int = 8) -> tuple[float, int, int]:
    """BER at one operating point; returns (ber, codewords, bit_errors).

    Runs until min_bit_errors have been seen or max_codewords simulated,
    with the stopping rule evaluated at fixed chunk boundaries so the
    outcome does not depend on the worker count.
    """
    chain = _BerChain(cfg, code, snr_db, qz)
    errors = 0
    done = 0
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while done < cfg.max_codewords and errors < cfg.min_bit_errors:
            wave = []
            lo = done
            while lo < cfg.max_codewords and len(wave) < max(threads, 1):
                hi = min(lo + chunk, cfg.max_codewords)
                wave.append((chain, lo, hi))
                lo = hi
            if pool is not None:
                results = list(pool.map(_ber_chunk, wave))
            else:
                results = [_ber_chunk(w) for w in wave]
            for (_, clo, chi), e in zip(wave, results):
                errors += e
                done = chi
                if errors >= cfg.min_bit_errors:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return errors / (done * code.k), done, errors


def run_ber(cfg: ExperimentConfig, threads: int = 1, code: ParityCheckCode | None = None):
    """Coded BER curves for each (SNR, word length) pair.

    Offline mode designs the quantizer from a labeled calibration run;
    online mode estimates it from unlabeled LLRs. q_bits 0 rows decode
    clipped raw LLRs.
    """
    if code is None:
        code = build_code(cfg.block_length, cfg.dv, cfg.dc, seed=cfg.seed)
    rows = []
    for snr in cfg.snr_grid_db:
        for q in cfg.q_bits:
            if q == NON_QUANTIZED:
                qz = None
            elif cfg.quantizer_mode == "online":
                qz = design_quantizer_on_the_fly(cfg, snr, q, threads=threads)
            else:
                qz = design_quantizer_offline(cfg, snr, q, threads=threads)
            ber, n_cw, n_err = simulate_ber(cfg, code, snr, qz, threads=threads)
            rows.append([float(snr), int(q), cfg.quantizer_mode, ber, n_cw, n_err])
    write_csv(cfg.output_path,
              ["snr_db", "q_bits", "quantizer_mode", "ber",
               "codewords_simulated", "bit_errors"], rows)
    return rows


def run_level_sweep(cfg: ExperimentConfig, threads: int = 1,
                    code: ParityCheckCode | None = None):
    """BER against the 1-bit quantizer level at a fixed SNR.

    Sweeps symmetric level pairs (-L, L) over level_grid and appends the
    log-ratio design level as a flagged extra point.
    """
    if code is None:
        code = build_code(cfg.block_length, cfg.dv, cfg.dc, seed=cfg.seed)
    snr = float(cfg.snr_grid_db[0])
    reference = design_quantizer_offline(cfg, snr, 1, threads=threads)
    lam_star = float(reference.levels[1])
    rows = []
    for lam, is_ref in [(float(v), False) for v in cfg.level_grid] + [(lam_star, True)]:
        qz = LlrQuantizer(np.array([0.0]), np.array([-lam, lam]))
        ber, n_cw, n_err = simulate_ber(cfg, code, snr, qz, threads=threads)
        rows.append([snr, lam, ber, n_cw, n_err, is_ref])
    write_csv(cfg.output_path,
              ["snr_db", "lambda2", "ber", "codewords_simulated",
               "bit_errors", "is_reference_level"], rows)
    return rows
