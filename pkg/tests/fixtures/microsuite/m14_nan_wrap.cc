// entry: Resize
// category: intermediary variables (ObjectWrap member)
#include <nan.h>

class Image : public Nan::ObjectWrap {
 public:
  static NAN_METHOD(Resize);
  int width;
};

NAN_METHOD(Image::Resize) {
  Image* self = Nan::ObjectWrap::Unwrap<Image>(info.Holder());
  int w = info[0]->Int32Value(Nan::GetCurrentContext()).FromJust();  // sink: tainted
  self->width = w;
  info.GetReturnValue().Set(Nan::New(self->width));
}
