enum shape_kind { CIRCLE, RECT };

union payload {
    double radius;
    struct { double w, h; } rect;
};

struct shape {
    enum shape_kind kind;
    union payload p;
};

double area(const struct shape *s)
{
    switch (s->kind) {
    case CIRCLE:
        return 3.14159 * s->p.radius * s->p.radius;
    case RECT:
        return s->p.rect.w * s->p.rect.h;
    }
    return 0.0;
}
