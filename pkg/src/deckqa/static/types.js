// Wire types mirrored from the analysis service's JSON output.
export {};
