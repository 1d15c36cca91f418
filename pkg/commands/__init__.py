commands = {
    "fit": {
        "name": "Fit",
        "description": "Fit, predict with and recompute bands of functional regression models",
        "extension": "commands.fit"
    },
    "simulate": {
        "name": "Simulate",
        "description": "Generate simulated data and run the Monte Carlo table",
        "extension": "commands.simulate"
    },
    "diagnose": {
        "name": "Diagnose",
        "description": "Check the score cross-covariance eigenvalue condition",
        "extension": "commands.diagnose"
    },
    "download": {
        "name": "Download",
        "description": "Download the spectrometrics dataset",
        "extension": "commands.download"
    }
}
