# Package tests — tests automatisés du spectromètre distant (pytest).
