# Package app/analysis — Alignement des bases de temps, coïncidences et scan
