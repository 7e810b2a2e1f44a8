import logging
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd
import streamlit as st

# Add project root to path
sys.path.append(str(Path(__file__).resolve().parents[1]))

from cli.ingest import load_csv
from cli.report import read_report
from inference.summary import summarize_levels
from samplers.gibbs_orchestrator import ChainConfig, run_chain, run_plugin_chain
from utils.errors import ConditionalBayesError
from utils.model import PriorSpec

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

st.set_page_config(
    page_title="Conditional Bayes treatment effects",
    layout="wide",
    initial_sidebar_state="expanded",
)

HISTOGRAM_BINS = 40


class ConditionalBayesApp:
    def __init__(self):
        self.initialize_session_state()

    def initialize_session_state(self):
        """Initialize Streamlit session state"""
        if "fit_result" not in st.session_state:
            st.session_state.fit_result = None
        if "settings" not in st.session_state:
            st.session_state.settings = {}

    def render_sidebar(self) -> Dict[str, Any]:
        st.sidebar.title("Fit settings")
        uploaded = st.sidebar.file_uploader("Dataset (CSV)", type=["csv"])
        settings: Dict[str, Any] = {"upload": uploaded}
        if uploaded is None:
            return settings

        columns = list(pd.read_csv(uploaded, nrows=0).columns)
        uploaded.seek(0)
        settings["outcome"] = st.sidebar.selectbox("Outcome column", columns)
        settings["treatment"] = st.sidebar.selectbox("Treatment column", columns, index=min(1, len(columns) - 1))
        settings["categorical"] = st.sidebar.multiselect("Categorical columns", columns)
        settings["nuisance"] = st.sidebar.radio("Nuisance estimates", ["gibbs", "lasso"], horizontal=True)
        settings["alpha"] = st.sidebar.slider("alpha", 0.01, 0.20, 0.05, step=0.01)
        settings["iterations"] = int(st.sidebar.number_input("Sweeps", min_value=200, value=6000, step=500))
        settings["burn_in"] = int(st.sidebar.number_input("Burn-in", min_value=0, value=1000, step=100))
        settings["seed"] = int(st.sidebar.number_input("Seed", min_value=0, value=2024, step=1))
        st.session_state.settings = settings
        return settings

    def run_fit(self, settings: Dict[str, Any]) -> Dict[str, Any]:
        """Ingest the upload, run the chain and summarize; failures come back as a status dict"""
        try:
            with tempfile.TemporaryDirectory() as tmp:
                path = Path(tmp) / settings["upload"].name
                path.write_bytes(settings["upload"].getvalue())
                ingested = load_csv(path, settings["treatment"], settings["outcome"], settings["categorical"])
            data = ingested.dataset
            chain = ChainConfig(iterations=settings["iterations"], burn_in=settings["burn_in"], seed=settings["seed"])
            priors = PriorSpec().resolve(data.n, data.d)
            runner = run_plugin_chain if settings["nuisance"] == "lasso" else run_chain
            draws = runner(data, priors, chain)
            return {
                "status": "completed",
                "intervals": summarize_levels(draws, settings["alpha"]),
                "draws": draws.draws,
                "n": data.n,
                "d": data.d,
                "dropped_rows": ingested.dropped_rows,
            }
        except ConditionalBayesError as e:
            logger.error(f"Fit failed: {str(e)}")
            return {"status": "failed", "error": str(e)}

    def render_fit_tab(self, settings: Dict[str, Any]):
        if settings.get("upload") is None:
            st.info("Upload a CSV in the sidebar to fit a model.")
            return
        if st.button("Run fit"):
            with st.spinner("Sampling..."):
                st.session_state.fit_result = self.run_fit(settings)

        result = st.session_state.fit_result
        if result is None:
            return
        if result["status"] != "completed":
            st.error(f"Fit failed: {result['error']}")
            return

        st.caption(f"n = {result['n']}, d = {result['d']}, rows removed for missing values: {result['dropped_rows']}")
        st.dataframe(pd.DataFrame([i.to_dict() for i in result["intervals"]]))
        draws = np.asarray(result["draws"])
        for j, interval in enumerate(result["intervals"]):
            column = draws if draws.ndim == 1 else draws[:, j]
            counts, edges = np.histogram(column, bins=HISTOGRAM_BINS)
            centers = np.round(0.5 * (edges[:-1] + edges[1:]), 3)
            st.subheader(f"Posterior draws of {interval.term}")
            st.bar_chart(pd.DataFrame({"draws": counts}, index=centers))

    def render_report_tab(self):
        uploaded = st.file_uploader("Simulation report (report.csv)", type=["csv"], key="report_upload")
        if uploaded is None:
            return
        try:
            with tempfile.TemporaryDirectory() as tmp:
                path = Path(tmp) / "report.csv"
                path.write_bytes(uploaded.getvalue())
                report = read_report(path)
            st.dataframe(report.to_frame())
        except ConditionalBayesError as e:
            st.error(f"Could not read report: {str(e)}")

    def run(self):
        """Main application entry point"""
        settings = self.render_sidebar()
        st.title("Treatment effect in high-dimensional logistic regression")
        fit_tab, report_tab = st.tabs(["Fit", "Simulation report"])
        with fit_tab:
            self.render_fit_tab(settings)
        with report_tab:
            self.render_report_tab()


def main():
    """Main function"""
    app = ConditionalBayesApp()
    app.run()


if __name__ == "__main__":
    main()
