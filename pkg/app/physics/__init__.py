# Package app/physics — Moteur analytique (fonctions spectrales, ψ(τ), G², R_c)
