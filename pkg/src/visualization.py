"""
Visualization Module for Correctable Regions

Renders the bound-region curves in (t_u, t_l) weights, the comparison of
the generalized and tighter bounds, and the decoding-failure scatter in
rate coordinates with boundary overlays. Region and comparison figures
plot the same bound_region tables the bounds-region command writes; the
failure scatter reads only the tables of a scatter run (CSV or JSON).
Figures are saved as PNG files.
"""

from pathlib import Path

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from .bounds import BoundKind, CodeParams, asymptotic_curve, bound_region  # noqa: E402
from .utils import banner, report  # noqa: E402

plt.rcParams.update({
    'figure.figsize': (8, 6),
    'font.size': 12,
    'axes.labelsize': 14,
    'axes.titlesize': 15,
    'legend.fontsize': 11,
    'savefig.dpi': 150,
    'savefig.bbox': 'tight',
})


class BoundsVisualizer:
    """
    Plots for bound regions and Monte-Carlo failure scatters.

    Parameters:
    -----------
    output_dir : str
        Directory to save plots (default: 'output/plots')
    verbose : bool
        Print a line per saved figure
    """

    def __init__(self, output_dir='output/plots', verbose=True):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.verbose = verbose
        sns.set_theme(style='whitegrid')

        self.colors = {
            BoundKind.GENERALIZED: '#2E86AB',
            BoundKind.TIGHTER: '#A23B72',
            BoundKind.COMBINED: '#F18F01',
            BoundKind.ORIGINAL: '#6C757D',
        }

    def _save(self, fig, save_path, default_name):
        path = Path(save_path) if save_path else self.output_dir / default_name
        fig.savefig(path)
        plt.close(fig)
        report(f"✓ Saved plot: {path}", self.verbose)
        return str(path)

    def plot_region_curves(self, block_lengths, k=1, kind=BoundKind.GENERALIZED, save_path=None):
        """
        Correctable-region boundaries for several block lengths.

        Parameters:
        -----------
        block_lengths : list of int
            Values of n, one curve each
        k : int
            Logical qubits
        kind : BoundKind
            Bound to draw

        Returns:
        --------
        str
            Path of the saved PNG
        """
        kind = BoundKind(kind)
        frames = []
        for n in block_lengths:
            df = bound_region(CodeParams(n, k), kind).to_dataframe()
            df['n'] = f"n = {n}"
            frames.append(df)
        data = pd.concat(frames, ignore_index=True)

        fig, ax = plt.subplots()
        sns.lineplot(data=data, x='t_u', y='max_t_l', hue='n', drawstyle='steps-post',
                     marker='o', markersize=4, ax=ax)
        ax.set_xlabel('Unlocated errors $t_u$', fontweight='bold')
        ax.set_ylabel('Located errors $t_l$', fontweight='bold')
        ax.set_title(f'{kind.value.capitalize()} bound regions (k = {k})', fontweight='bold')
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
        return self._save(fig, save_path, f'region_curves_{kind.value}.png')

    def plot_bound_comparison(self, n, k=1, save_path=None):
        """Generalized against tighter bound at one block length."""
        params = CodeParams(n, k)
        fig, ax = plt.subplots()
        for kind in (BoundKind.GENERALIZED, BoundKind.TIGHTER):
            df = bound_region(params, kind).to_dataframe()
            ax.step(df['t_u'], df['max_t_l'], where='post', label=kind.value,
                    color=self.colors[kind], linewidth=2)
        ax.set_xlabel('Unlocated errors $t_u$', fontweight='bold')
        ax.set_ylabel('Located errors $t_l$', fontweight='bold')
        ax.set_title(f'Generalized vs tighter bound (n = {n}, k = {k})', fontweight='bold')
        ax.legend(frameon=True)
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
        return self._save(fig, save_path, f'bound_comparison_n{n}.png')

    def plot_failure_scatter(self, failures: pd.DataFrame, boundaries=None, asymptotic=True, save_path=None):
        """
        Decoding failures in rate coordinates with boundary overlays.

        Parameters:
        -----------
        failures : pandas.DataFrame
            Failed trials with columns q and p
        boundaries : dict, optional
            Label -> DataFrame with columns q and p (finite-n boundaries)
        asymptotic : bool
            Also draw the large-n boundary at rate 0
        """
        fig, ax = plt.subplots()
        if len(failures):
            sns.scatterplot(data=failures, x='q', y='p', s=10, color='black', alpha=0.6,
                            label=f'failures ({len(failures)})', ax=ax)
        for i, (label, curve) in enumerate((boundaries or {}).items()):
            curve = curve.sort_values('q')
            ax.plot(curve['q'], curve['p'], label=label, color=f'C{i}', linewidth=2)
        if asymptotic:
            curve = asymptotic_curve(0.0, q_step=0.005)
            ax.plot(curve['q'], curve['p_boundary'], label='large-n limit', color='gray',
                    linestyle='--', linewidth=1.5)
        ax.set_xlabel('Located rate $q = t_l / n$', fontweight='bold')
        ax.set_ylabel('Unlocated rate $p = t_u / (n - t_l)$', fontweight='bold')
        ax.set_title('Decoding failures', fontweight='bold')
        ax.set_xlim(0, max(0.7, float(np.nanmax(failures['q'])) if len(failures) else 0.7))
        ax.set_ylim(bottom=0)
        ax.legend(frameon=True)
        return self._save(fig, save_path, 'failure_scatter.png')

    def create_figure_set(self, block_lengths=(10, 20, 30, 40, 50), k=1, failures=None, boundaries=None):
        """
        Render every figure that the given inputs allow.

        Returns:
        --------
        dict
            Figure name -> saved path
        """
        banner("🎨 Rendering figures", self.verbose)
        paths = {
            'region_curves': self.plot_region_curves(block_lengths, k),
            'bound_comparison': self.plot_bound_comparison(max(block_lengths), k),
        }
        if failures is not None:
            paths['failure_scatter'] = self.plot_failure_scatter(failures, boundaries)
        report(f"✅ Created {len(paths)} plots in {self.output_dir}", self.verbose)
        return paths
