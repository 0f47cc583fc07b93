"""Render the simulator's CSV outputs to PNG files. Usage: plot_results.py OUT_DIR"""
import csv
import os
import sys

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit(1)


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def col(rows, name):
    return [float(r[name]) for r in rows]


def main(out_dir):
    ber = os.path.join(out_dir, "ber_sweep.csv")
    if os.path.exists(ber):
        rows = read(ber)
        snr = col(rows, "snr_db")
        fig, ax = plt.subplots()
        ax.semilogy(snr, [max(v, 1e-7) for v in col(rows, "legit_ber_plaintext")], "o-", label="legitimate")
        ax.semilogy(snr, [max(v, 1e-7) for v in col(rows, "legit_ber_unencrypted")], "x--", label="unencrypted")
        ax.semilogy(snr, col(rows, "eve_ber"), "s-", label="eavesdropper")
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("BER")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.savefig(os.path.join(out_dir, "ber_sweep.png"), dpi=120)

    const = os.path.join(out_dir, "constellation.csv")
    if os.path.exists(const):
        rows = read(const)
        snrs = sorted({float(r["snr_db"]) for r in rows})
        if snrs:
            fig, axes = plt.subplots(1, len(snrs), figsize=(3 * len(snrs), 3), squeeze=False)
            for ax, snr in zip(axes[0], snrs):
                pts = [r for r in rows if float(r["snr_db"]) == snr]
                ax.scatter(col(pts, "i"), col(pts, "q"), s=2)
                ax.set_title(f"{snr:g} dB")
                ax.set_aspect("equal")
            fig.tight_layout()
            fig.savefig(os.path.join(out_dir, "constellation.png"), dpi=120)

    lat = os.path.join(out_dir, "latency_sweep.csv")
    if os.path.exists(lat):
        rows = read(lat)
        eps = [max(e, 1e-5) for e in col(rows, "epsilon")]
        fig, ax = plt.subplots()
        ax.semilogx(eps, col(rows, "symbol_ratio"), "o-", label="symbols / baseline")
        ax.semilogx(eps, col(rows, "accuracy"), "s-", label="accuracy")
        ax.set_xlabel("epsilon")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.savefig(os.path.join(out_dir, "latency_sweep.png"), dpi=120)


if __name__ == "__main__":
    main(sys.argv[1])
