# Package app/io — Flux d'horodatage et format binaire .ttag
