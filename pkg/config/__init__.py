# config package: settings and logging
